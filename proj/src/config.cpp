#include "dner/config.hpp"

#include <cstdlib>
#include <fstream>

#include "dner/errors.hpp"

namespace dner {

namespace {

int parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw DataError("config: " + key + " needs an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw DataError("config: " + key + " needs an integer, got '" + v + "'");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw DataError("config: " + key + " needs a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError("config: " + key + " needs true/false, got '" + v + "'");
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "model_kind") {
    if (value != "tagger" && value != "baseline")
      throw DataError("config: model_kind must be tagger or baseline, got '" +
                      value + "'");
    cfg.model_kind = value;
  } else if (key == "epochs") {
    cfg.epochs = parse_int(key, value);
  } else if (key == "max_epochs") {
    cfg.max_epochs = parse_int(key, value);
  } else if (key == "minibatch_size") {
    cfg.minibatch_size = parse_int(key, value);
  } else if (key == "dropout_base") {
    cfg.dropout_base = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "use_ctype") {
    cfg.use_ctype = parse_bool(key, value);
  } else if (key == "use_icd") {
    cfg.use_icd = parse_bool(key, value);
  } else if (key == "constrain_training") {
    cfg.constrain_training = parse_bool(key, value);
  } else if (key == "lambda_l2") {
    cfg.lambda_l2 = parse_double(key, value);
  } else if (key == "template") {
    parse_feature_template(value);  // validates
    cfg.tmpl = value;
  } else if (key == "adam.alpha") {
    cfg.adam.alpha = parse_double(key, value);
  } else if (key == "adam.beta1") {
    cfg.adam.beta1 = parse_double(key, value);
  } else if (key == "adam.beta2") {
    cfg.adam.beta2 = parse_double(key, value);
  } else if (key == "adam.eps") {
    cfg.adam.eps = parse_double(key, value);
  } else if (key == "char_dim") {
    cfg.dims.char_dim = parse_int(key, value);
  } else if (key == "icd_dim") {
    cfg.dims.icd_dim = parse_int(key, value);
  } else if (key == "ctype_dim") {
    cfg.dims.ctype_dim = parse_int(key, value);
  } else if (key == "hidden_dim") {
    cfg.dims.hidden_dim = parse_int(key, value);
  } else {
    throw DataError("config: unknown key '" + key + "'");
  }
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw DataError("config line " + std::to_string(lineno) + ": empty key");
    try {
      apply_config_entry(cfg, key, value);
    } catch (const DataError& e) {
      throw DataError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  try {
    return parse_run_config(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (epochs < 0) throw DataError("config: epochs must be >= 0");
  if (minibatch_size < 1) throw DataError("config: minibatch_size must be >= 1");
  if (!(dropout_base >= 0.0 && dropout_base < 1.0))
    throw DataError("config: dropout_base outside [0, 1)");
  if (lambda_l2 < 0.0) throw DataError("config: lambda_l2 must be >= 0");
  if (dims.char_dim < 1 || dims.hidden_dim < 1 || dims.icd_dim < 1 ||
      dims.ctype_dim < 1)
    throw DataError("config: embedding and hidden dimensions must be >= 1");
}

TrainConfig RunConfig::tagger_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.max_epochs = max_epochs;
  t.minibatch_size = minibatch_size;
  t.dropout_base = dropout_base;
  t.adam = adam;
  t.seed = seed;
  t.constrain_training = constrain_training;
  t.feat = {use_ctype, use_icd};
  t.dims = dims;
  return t;
}

BaselineConfig RunConfig::baseline_config() const {
  BaselineConfig b;
  b.tmpl = parse_feature_template(tmpl);
  b.epochs = epochs;
  b.minibatch_size = minibatch_size;
  b.lambda_l2 = lambda_l2;
  b.adam = adam;
  b.seed = seed;
  b.constrain_training = constrain_training;
  return b;
}

}  // namespace dner
