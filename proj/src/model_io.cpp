#include "dner/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dner/errors.hpp"
#include "dner/rng.hpp"

namespace dner {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hexfloat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size())
    throw DataError("model file: bad float literal '" + s + "'");
  return v;
}

ordered_json tensor_json(const ag::Tensor& t) {
  ordered_json shape = ordered_json::array();
  for (ag::Index d : t.shape()) shape.push_back(d);
  ordered_json values = ordered_json::array();
  for (ag::Index i = 0; i < t.size(); ++i) values.push_back(hexfloat(t.flat()[i]));
  return ordered_json{{"shape", std::move(shape)}, {"values", std::move(values)}};
}

ag::Tensor tensor_from_json(const ordered_json& j, const std::string& name) {
  const auto& shape = j.at("shape");
  std::vector<ag::Index> dims;
  for (const auto& d : shape) dims.push_back(d.get<ag::Index>());
  if (dims.empty() || dims.size() > 2)
    throw DataError("model file: parameter '" + name + "' has bad rank");
  ag::Tensor t = dims.size() == 1 ? ag::Tensor::zeros({dims[0]})
                                  : ag::Tensor::zeros({dims[0], dims[1]});
  const auto& values = j.at("values");
  if (static_cast<ag::Index>(values.size()) != t.size())
    throw DataError("model file: parameter '" + name +
                    "' value count does not match its shape");
  for (ag::Index i = 0; i < t.size(); ++i)
    t.flat()[i] = parse_hexfloat(values[static_cast<std::size_t>(i)]
                                     .get_ref<const std::string&>());
  return t;
}

ordered_json vocab_json(const Vocabulary& v) {
  ordered_json tokens = ordered_json::array();
  ordered_json freqs = ordered_json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    tokens.push_back(v.token(i));
    freqs.push_back(v.freq(i));
  }
  return ordered_json{{"tokens", std::move(tokens)}, {"freqs", std::move(freqs)}};
}

Vocabulary vocab_from_json(const ordered_json& j) {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> freqs;
  for (const auto& t : j.at("tokens")) tokens.push_back(t.get<std::string>());
  for (const auto& f : j.at("freqs")) freqs.push_back(f.get<std::uint64_t>());
  return Vocabulary::from_entries(std::move(tokens), std::move(freqs));
}

std::string checksum_hex(const std::string& payload) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));
  return buf;
}

// The checksum covers the canonical dump of the document minus the checksum
// field itself.
std::string finalize(ordered_json j) {
  std::string payload = j.dump(1);
  j["checksum"] = checksum_hex(payload);
  return j.dump(1) + "\n";
}

ordered_json parse_and_verify(const std::string& text, const char* expect_kind) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("model file: invalid or truncated JSON: ") +
                    e.what());
  }
  if (!j.is_object() || !j.contains("format_version"))
    throw DataError("model file: missing format_version");
  int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw DataError("model file: unsupported format version " +
                    std::to_string(version));
  if (!j.contains("checksum"))
    throw DataError("model file: missing checksum");
  std::string stored = j.at("checksum").get<std::string>();
  j.erase("checksum");
  if (checksum_hex(j.dump(1)) != stored)
    throw DataError("model file: checksum mismatch (corrupted file)");
  std::string kind = j.value("model_kind", std::string{});
  if (kind != expect_kind)
    throw DataError("model file: expected a " + std::string(expect_kind) +
                    " model, found '" + kind + "'");
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out << text;
  if (!out) throw DataError("short write to model file: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string serialize_model(const TaggerModel& m) {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["model_kind"] = "tagger";
  j["feature_config"] =
      ordered_json{{"use_ctype", m.feat.use_ctype}, {"use_icd", m.feat.use_icd}};
  j["dims"] = ordered_json{{"char_dim", m.dims.char_dim},
                           {"icd_dim", m.dims.icd_dim},
                           {"ctype_dim", m.dims.ctype_dim},
                           {"hidden_dim", m.dims.hidden_dim}};
  j["char_vocab"] = vocab_json(m.char_vocab);
  j["icd_vocab"] = vocab_json(m.icd_vocab);
  ordered_json params = ordered_json::object();
  params["char_emb"] = tensor_json(m.char_emb.weights);
  if (m.feat.use_icd) params["icd_emb"] = tensor_json(m.icd_emb.weights);
  if (m.feat.use_ctype) params["ctype_emb"] = tensor_json(m.ctype_emb.weights);
  params["fwd.W"] = tensor_json(m.fwd.W);
  params["fwd.U"] = tensor_json(m.fwd.U);
  params["fwd.b"] = tensor_json(m.fwd.b);
  params["bwd.W"] = tensor_json(m.bwd.W);
  params["bwd.U"] = tensor_json(m.bwd.U);
  params["bwd.b"] = tensor_json(m.bwd.b);
  params["out.W"] = tensor_json(m.out.W);
  params["out.b"] = tensor_json(m.out.b);
  params["crf.transitions"] = tensor_json(m.crf.transitions);
  params["crf.start"] = tensor_json(m.crf.start);
  params["crf.end"] = tensor_json(m.crf.end);
  j["params"] = std::move(params);
  return finalize(std::move(j));
}

std::string serialize_model(const BaselineModel& m) {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["model_kind"] = "baseline";
  j["template"] = feature_template_name(m.tmpl);
  j["lambda_l2"] = hexfloat(m.lambda_l2);
  j["features"] = vocab_json(m.features);
  ordered_json params = ordered_json::object();
  params["weights"] = tensor_json(m.weights);
  params["crf.transitions"] = tensor_json(m.crf.transitions);
  params["crf.start"] = tensor_json(m.crf.start);
  params["crf.end"] = tensor_json(m.crf.end);
  j["params"] = std::move(params);
  return finalize(std::move(j));
}

void save_model(const TaggerModel& m, const std::string& path) {
  write_file(path, serialize_model(m));
}

void save_model(const BaselineModel& m, const std::string& path) {
  write_file(path, serialize_model(m));
}

ModelKind peek_model_kind(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("model file: invalid or truncated JSON: ") +
                    e.what());
  }
  std::string kind = j.is_object() ? j.value("model_kind", std::string{}) : "";
  if (kind == "tagger") return ModelKind::kTagger;
  if (kind == "baseline") return ModelKind::kBaseline;
  throw DataError("model file: unknown model kind '" + kind + "'");
}

namespace {

const ordered_json& require_param(const ordered_json& params,
                                  const std::string& name) {
  if (!params.contains(name))
    throw DataError("model file: missing parameter '" + name + "'");
  return params.at(name);
}

ag::Tensor load_param(const ordered_json& params, const std::string& name) {
  return tensor_from_json(require_param(params, name), name);
}

}  // namespace

TaggerModel parse_tagger(const std::string& text) {
  ordered_json j = parse_and_verify(text, "tagger");
  TaggerModel m;
  try {
    const auto& fc = j.at("feature_config");
    m.feat.use_ctype = fc.at("use_ctype").get<bool>();
    m.feat.use_icd = fc.at("use_icd").get<bool>();
    const auto& dims = j.at("dims");
    m.dims.char_dim = dims.at("char_dim").get<ag::Index>();
    m.dims.icd_dim = dims.at("icd_dim").get<ag::Index>();
    m.dims.ctype_dim = dims.at("ctype_dim").get<ag::Index>();
    m.dims.hidden_dim = dims.at("hidden_dim").get<ag::Index>();
    m.char_vocab = vocab_from_json(j.at("char_vocab"));
    m.icd_vocab = vocab_from_json(j.at("icd_vocab"));
    const auto& params = j.at("params");
    m.char_emb.weights = load_param(params, "char_emb");
    m.char_emb.vocab_size = m.char_emb.weights.shape()[0];
    m.char_emb.dim = m.char_emb.weights.shape()[1];
    if (m.feat.use_icd) {
      m.icd_emb.weights = load_param(params, "icd_emb");
      m.icd_emb.vocab_size = m.icd_emb.weights.shape()[0];
      m.icd_emb.dim = m.icd_emb.weights.shape()[1];
    }
    if (m.feat.use_ctype) {
      m.ctype_emb.weights = load_param(params, "ctype_emb");
      m.ctype_emb.vocab_size = m.ctype_emb.weights.shape()[0];
      m.ctype_emb.dim = m.ctype_emb.weights.shape()[1];
    }
    for (auto [lstm, prefix] :
         {std::pair{&m.fwd, "fwd"}, std::pair{&m.bwd, "bwd"}}) {
      std::string p(prefix);
      lstm->W = load_param(params, p + ".W");
      lstm->U = load_param(params, p + ".U");
      lstm->b = load_param(params, p + ".b");
      lstm->hidden_dim = lstm->U.shape()[1];
      lstm->input_dim = lstm->W.shape()[1];
    }
    m.out.W = load_param(params, "out.W");
    m.out.b = load_param(params, "out.b");
    m.out.out = m.out.W.shape()[0];
    m.out.in = m.out.W.shape()[1];
    m.crf.transitions = load_param(params, "crf.transitions");
    m.crf.start = load_param(params, "crf.start");
    m.crf.end = load_param(params, "crf.end");
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  if (m.char_emb.vocab_size != static_cast<ag::Index>(m.char_vocab.size()))
    throw DataError("model file: embedding rows do not match the vocabulary");
  if (m.fwd.input_dim != m.lstm_input_dim())
    throw DataError("model file: encoder input width does not match features");
  return m;
}

BaselineModel parse_baseline(const std::string& text) {
  ordered_json j = parse_and_verify(text, "baseline");
  BaselineModel m;
  try {
    m.tmpl = parse_feature_template(j.at("template").get<std::string>());
    m.lambda_l2 = parse_hexfloat(j.at("lambda_l2").get<std::string>());
    m.features = vocab_from_json(j.at("features"));
    const auto& params = j.at("params");
    m.weights = load_param(params, "weights");
    m.crf.transitions = load_param(params, "crf.transitions");
    m.crf.start = load_param(params, "crf.start");
    m.crf.end = load_param(params, "crf.end");
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  if (m.weights.shape()[0] != static_cast<ag::Index>(m.features.size()))
    throw DataError("model file: weight rows do not match the feature count");
  return m;
}

TaggerModel load_tagger(const std::string& path) {
  return parse_tagger(read_file(path));
}

BaselineModel load_baseline(const std::string& path) {
  return parse_baseline(read_file(path));
}

}  // namespace dner
