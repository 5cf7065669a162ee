#include "dner/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"

#include "dner/errors.hpp"
#include "dner/rng.hpp"
#include "dner/utf8.hpp"

namespace dner {

namespace {

using ordered_json = nlohmann::ordered_json;

SlotKind parse_slot(const std::string& s) {
  if (s == "single") return SlotKind::kSingle;
  if (s == "pair") return SlotKind::kPair;
  if (s == "abut") return SlotKind::kAbut;
  throw DataError("synthetic spec: unknown slot kind '" + s + "'");
}

const char* slot_name(SlotKind k) {
  switch (k) {
    case SlotKind::kSingle: return "single";
    case SlotKind::kPair: return "pair";
    case SlotKind::kAbut: return "abut";
  }
  return "?";
}

WordPool pool_from_json(const ordered_json& j, const char* what) {
  WordPool p;
  p.count = j.value("count", 0);
  if (j.contains("len")) {
    const auto& len = j.at("len");
    if (!len.is_array() || len.size() != 2)
      throw DataError(std::string("synthetic spec: ") + what +
                      ".len must be [min, max]");
    p.min_len = len[0].get<int>();
    p.max_len = len[1].get<int>();
  }
  p.alphabet = j.value("alphabet", std::string{});
  return p;
}

ordered_json pool_to_json(const WordPool& p) {
  return ordered_json{
      {"count", p.count}, {"len", {p.min_len, p.max_len}}, {"alphabet", p.alphabet}};
}

}  // namespace

SynthSpec SynthSpec::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("synthetic spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("synthetic spec: top level must be an object");
  SynthSpec spec;
  try {
    for (const auto& e : j.value("entities", ordered_json::array())) {
      SynthEntity ent;
      ent.surface = e.at("surface").get<std::string>();
      ent.in_gazetteer = e.value("gazetteer", true);
      ent.code = e.value("code", std::string{});
      spec.entities.push_back(std::move(ent));
    }
    for (const auto& d : j.value("decoys", ordered_json::array()))
      spec.decoys.push_back(d.get<std::string>());
    if (j.contains("rare_entities"))
      spec.rare_entities = pool_from_json(j.at("rare_entities"), "rare_entities");
    if (j.contains("gen_decoys"))
      spec.gen_decoys = pool_from_json(j.at("gen_decoys"), "gen_decoys");
    for (const auto& t : j.value("templates", ordered_json::array())) {
      SynthTemplate tpl;
      tpl.pre = t.at("pre").get<std::string>();
      tpl.mid = t.at("mid").get<std::string>();
      tpl.pos = t.at("pos").get<std::string>();
      tpl.neg = t.at("neg").get<std::string>();
      tpl.slot = parse_slot(t.value("slot", std::string("single")));
      spec.templates.push_back(std::move(tpl));
    }
    spec.connector = j.value("connector", std::string("と"));
    spec.rare_code_prefix = j.value("rare_code_prefix", std::string("R"));
    spec.n_ratio = j.value("n_ratio", 0.14);
    spec.rare_rate = j.value("rare_rate", 0.0);
    if (j.contains("sentences_per_doc")) {
      const auto& s = j.at("sentences_per_doc");
      if (!s.is_array() || s.size() != 2)
        throw DataError("synthetic spec: sentences_per_doc must be [min, max]");
      spec.min_sentences = s[0].get<int>();
      spec.max_sentences = s[1].get<int>();
    }
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string SynthSpec::to_json_text() const {
  ordered_json j;
  j["entities"] = ordered_json::array();
  for (const SynthEntity& e : entities) {
    ordered_json je{{"surface", e.surface}};
    if (!e.code.empty()) je["code"] = e.code;
    if (!e.in_gazetteer) je["gazetteer"] = false;
    j["entities"].push_back(std::move(je));
  }
  j["decoys"] = decoys;
  j["rare_entities"] = pool_to_json(rare_entities);
  j["gen_decoys"] = pool_to_json(gen_decoys);
  j["templates"] = ordered_json::array();
  for (const SynthTemplate& t : templates)
    j["templates"].push_back(ordered_json{{"pre", t.pre},
                                          {"mid", t.mid},
                                          {"pos", t.pos},
                                          {"neg", t.neg},
                                          {"slot", slot_name(t.slot)}});
  j["connector"] = connector;
  j["rare_code_prefix"] = rare_code_prefix;
  j["n_ratio"] = n_ratio;
  j["rare_rate"] = rare_rate;
  j["sentences_per_doc"] = {min_sentences, max_sentences};
  return j.dump(2) + "\n";
}

void SynthSpec::validate() const {
  if (entities.empty()) throw DataError("synthetic spec: empty entity lexicon");
  for (const SynthEntity& e : entities) {
    if (e.surface.empty()) throw DataError("synthetic spec: entity with empty surface");
    if (e.in_gazetteer && e.code.empty())
      throw DataError("synthetic spec: gazetteer entity '" + e.surface +
                      "' needs a code");
  }
  if (templates.empty()) throw DataError("synthetic spec: no templates");
  for (const SynthTemplate& t : templates) {
    if (t.pos.empty() || t.neg.empty())
      throw DataError("synthetic spec: template with empty tail");
    if (t.pos == t.neg)
      throw DataError("synthetic spec: template tails must differ");
  }
  if (!(n_ratio >= 0.0 && n_ratio <= 1.0))
    throw DataError("synthetic spec: n_ratio outside [0, 1]");
  if (!(rare_rate >= 0.0 && rare_rate <= 1.0))
    throw DataError("synthetic spec: rare_rate outside [0, 1]");
  if (rare_rate > 0.0 && rare_entities.count <= 0)
    throw DataError("synthetic spec: rare_rate > 0 needs a rare_entities pool");
  for (const WordPool* p : {&rare_entities, &gen_decoys}) {
    if (p->count < 0) throw DataError("synthetic spec: negative pool count");
    if (p->count > 0) {
      if (p->alphabet.empty())
        throw DataError("synthetic spec: word pool without alphabet");
      if (p->min_len < 1 || p->min_len > p->max_len || p->max_len > 16)
        throw DataError("synthetic spec: bad word pool length range");
    }
  }
  bool has_decoy_slot = false;
  for (const SynthTemplate& t : templates)
    if (t.slot != SlotKind::kSingle) has_decoy_slot = true;
  if (has_decoy_slot && decoys.empty() && gen_decoys.count == 0)
    throw DataError("synthetic spec: pair/abut templates need decoy words");
  if (min_sentences < 1 || min_sentences > max_sentences)
    throw DataError("synthetic spec: bad sentences_per_doc range");
}

namespace {

bool contains_any(const std::u32string& text,
                  const std::vector<std::u32string>& words) {
  for (const std::u32string& w : words)
    if (text.find(w) != std::u32string::npos) return true;
  return false;
}

std::u32string gen_word(Rng& rng, const std::u32string& alphabet, int min_len,
                        int max_len) {
  std::size_t len = static_cast<std::size_t>(min_len) +
                    rng.below(static_cast<std::uint64_t>(max_len - min_len + 1));
  std::u32string w;
  w.reserve(len);
  for (std::size_t i = 0; i < len; ++i)
    w.push_back(alphabet[rng.below(alphabet.size())]);
  return w;
}

void append_part(Sentence& s, const std::u32string& text,
                 std::optional<Tag> first, std::optional<Tag> rest) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    CharRecord r;
    r.ch = text[i];
    r.ctype = classify_char_type(r.ch);
    r.tag = i == 0 ? first : rest;
    s.records.push_back(std::move(r));
  }
}

}  // namespace

SynthResult generate_synthetic(std::uint64_t seed, int n_docs,
                               const SynthSpec& spec) {
  if (n_docs < 1) throw UsageError("synthetic generation: n_docs must be >= 1");
  spec.validate();
  Rng rng = Rng::derive(seed, "synth");

  std::vector<std::u32string> common_surfaces;
  std::set<std::u32string> used;
  for (const SynthEntity& e : spec.entities) {
    std::u32string s = decode_utf8(e.surface);
    if (!used.insert(s).second)
      throw DataError("synthetic spec: duplicate entity surface '" + e.surface + "'");
    common_surfaces.push_back(std::move(s));
  }
  std::vector<std::u32string> explicit_decoys;
  for (const std::string& d : spec.decoys) {
    std::u32string s = decode_utf8(d);
    if (!used.insert(s).second)
      throw DataError("synthetic spec: decoy duplicates another word: '" + d + "'");
    explicit_decoys.push_back(std::move(s));
  }

  // Procedural pools.  Rare surfaces must be distinct from every other word;
  // decoys additionally must not contain any gazetteer surface (a stamped code
  // inside a decoy would leak dictionary evidence onto untagged characters).
  auto draw_pool = [&](const WordPool& pool, auto&& accept) {
    std::vector<std::u32string> words;
    if (pool.count == 0) return words;
    std::u32string alphabet = decode_utf8(pool.alphabet);
    for (int i = 0; i < pool.count; ++i) {
      int tries = 0;
      while (true) {
        std::u32string w = gen_word(rng, alphabet, pool.min_len, pool.max_len);
        if (!used.contains(w) && accept(w)) {
          used.insert(w);
          words.push_back(std::move(w));
          break;
        }
        if (++tries > 1000)
          throw DataError("synthetic spec: word pool exhausted the alphabet");
      }
    }
    return words;
  };

  std::vector<std::u32string> rare_surfaces =
      draw_pool(spec.rare_entities, [](const std::u32string&) { return true; });

  std::vector<std::u32string> gaz_surfaces;
  for (std::size_t i = 0; i < spec.entities.size(); ++i)
    if (spec.entities[i].in_gazetteer) gaz_surfaces.push_back(common_surfaces[i]);
  gaz_surfaces.insert(gaz_surfaces.end(), rare_surfaces.begin(),
                      rare_surfaces.end());

  for (const std::u32string& d : explicit_decoys)
    if (contains_any(d, gaz_surfaces))
      throw DataError("synthetic spec: decoy contains a gazetteer surface");
  std::vector<std::u32string> decoy_pool = explicit_decoys;
  {
    std::vector<std::u32string> gen = draw_pool(
        spec.gen_decoys,
        [&](const std::u32string& w) { return !contains_any(w, gaz_surfaces); });
    decoy_pool.insert(decoy_pool.end(), gen.begin(), gen.end());
  }

  Gazetteer gaz;
  for (std::size_t i = 0; i < spec.entities.size(); ++i)
    if (spec.entities[i].in_gazetteer)
      gaz.add(common_surfaces[i], spec.entities[i].code);
  for (std::size_t i = 0; i < rare_surfaces.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04zu", spec.rare_code_prefix.c_str(),
                  i + 1);
    gaz.add(rare_surfaces[i], buf);
  }

  // Template literals must stay free of dictionary surfaces, or annotation
  // would stamp codes onto fixed context characters.
  std::u32string connector = decode_utf8(spec.connector);
  struct Decoded {
    std::u32string pre, mid, pos, neg;
  };
  std::vector<Decoded> tpl;
  for (const SynthTemplate& t : spec.templates) {
    Decoded d{decode_utf8(t.pre), decode_utf8(t.mid), decode_utf8(t.pos),
              decode_utf8(t.neg)};
    for (const std::u32string* part : {&d.pre, &d.mid, &d.pos, &d.neg})
      if (gaz.contains_match(*part))
        throw DataError("synthetic spec: template text contains a gazetteer surface");
    tpl.push_back(std::move(d));
  }
  if (gaz.contains_match(connector))
    throw DataError("synthetic spec: connector contains a gazetteer surface");

  // Sentence plan: counts per document, then exact modality and rare quotas
  // dealt across all entity slots (one entity per sentence).
  std::vector<int> sent_count(static_cast<std::size_t>(n_docs));
  std::size_t total = 0;
  for (int d = 0; d < n_docs; ++d) {
    sent_count[static_cast<std::size_t>(d)] =
        spec.min_sentences +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(
            spec.max_sentences - spec.min_sentences + 1)));
    total += static_cast<std::size_t>(sent_count[static_cast<std::size_t>(d)]);
  }
  auto quota = [total](double ratio) {
    return static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(total) + 0.5));
  };
  std::vector<char> negative(total, 0);
  std::fill_n(negative.begin(), std::min(quota(spec.n_ratio), total), 1);
  rng.shuffle(negative);
  std::vector<char> rare(total, 0);
  if (!rare_surfaces.empty())
    std::fill_n(rare.begin(), std::min(quota(spec.rare_rate), total), 1);
  rng.shuffle(rare);

  SynthResult out;
  std::size_t s_idx = 0;
  std::size_t rare_next = 0;
  for (int d = 0; d < n_docs; ++d) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%04d", d + 1);
    Document doc{idbuf, {}};
    for (int si = 0; si < sent_count[static_cast<std::size_t>(d)]; ++si, ++s_idx) {
      std::size_t t_idx = rng.below(tpl.size());
      const Decoded& t = tpl[t_idx];
      const SynthTemplate& t_spec = spec.templates[t_idx];
      bool neg_mod = negative[s_idx] != 0;
      std::u32string entity;
      if (rare[s_idx] != 0) {
        entity = rare_surfaces[rare_next % rare_surfaces.size()];
        ++rare_next;
      } else {
        entity = common_surfaces[rng.below(common_surfaces.size())];
      }
      Tag begin = neg_mod ? Tag::BN : Tag::BP;
      Tag inside = neg_mod ? Tag::IN : Tag::IP;

      Sentence s;
      append_part(s, t.pre, Tag::O, Tag::O);
      if (t_spec.slot == SlotKind::kSingle) {
        append_part(s, entity, begin, inside);
      } else {
        const std::u32string& decoy = decoy_pool[rng.below(decoy_pool.size())];
        bool entity_first = rng.below(2) == 0;
        const std::u32string& first = entity_first ? entity : decoy;
        const std::u32string& second = entity_first ? decoy : entity;
        append_part(s, first, entity_first ? begin : Tag::O,
                    entity_first ? inside : Tag::O);
        if (t_spec.slot == SlotKind::kPair)
          append_part(s, connector, Tag::O, Tag::O);
        append_part(s, second, entity_first ? Tag::O : begin,
                    entity_first ? Tag::O : inside);
      }
      append_part(s, t.mid, Tag::O, Tag::O);
      append_part(s, neg_mod ? t.neg : t.pos, Tag::O, Tag::O);
      doc.sentences.push_back(std::move(s));
    }
    out.docs.push_back(std::move(doc));
  }
  gaz.annotate(std::span<Document>(out.docs));
  out.gazetteer = std::move(gaz);
  return out;
}

namespace {

constexpr const char* kStandardSpec = R"json({
  "entities": [
    {"surface": "心房細動", "code": "I48"},
    {"surface": "肺炎", "code": "J18"},
    {"surface": "胃癌", "code": "C16"},
    {"surface": "脳梗塞", "code": "I63"},
    {"surface": "心不全", "code": "I50"},
    {"surface": "糖尿病", "code": "E14"},
    {"surface": "肝硬変", "code": "K74"},
    {"surface": "胆石症", "code": "K80"},
    {"surface": "腎不全", "code": "N19"},
    {"surface": "大腸癌", "code": "C18"},
    {"surface": "肺結核", "code": "A16"},
    {"surface": "膵炎", "code": "K85"},
    {"surface": "貧血", "code": "D64"},
    {"surface": "白血病", "code": "C95"},
    {"surface": "高血圧症", "code": "I10"},
    {"surface": "狭心症", "code": "I20"},
    {"surface": "肺水腫", "code": "J81"},
    {"surface": "不整脈", "code": "I49"},
    {"surface": "発熱", "gazetteer": false},
    {"surface": "めまい", "gazetteer": false},
    {"surface": "頭痛", "gazetteer": false}
  ],
  "decoys": ["抗生剤", "利尿薬", "造影剤", "内視鏡", "心電図", "聴診器", "点滴"],
  "rare_entities": {"count": 60, "len": [3, 5],
    "alphabet": "心房細動肺炎胃癌腫瘍梗塞出血狭窄潰閉症瘤栓脈結節変硬化不全熱膿胞嚢胆管腎肝脳膵貧圧糖尿石腸核水斑疹"},
  "gen_decoys": {"count": 60, "len": [3, 5],
    "alphabet": "心房細動肺炎胃癌腫瘍梗塞出血狭窄潰閉症瘤栓脈結節変硬化不全熱膿胞嚢胆管腎肝脳膵貧圧糖尿石腸核水斑疹"},
  "templates": [
    {"pre": "患者は", "mid": "を認め", "pos": "た。", "neg": "なかった。"},
    {"pre": "入院時より", "mid": "の所見があ", "pos": "った。", "neg": "るとは言えず。"},
    {"pre": "経過中に", "mid": "を指摘され", "pos": "た。", "neg": "ることはなかった。"},
    {"pre": "検査では", "mid": "の像を呈し", "pos": "ていた。", "neg": "ているとは考えにくい。"},
    {"pre": "本人は以前より", "mid": "があると述べ", "pos": "ていた。", "neg": "たことは一度もない。"},
    {"pre": "画像上", "mid": "の合併は", "pos": "明らかであった。", "neg": "否定的であった。"},
    {"pre": "術後に", "mid": "を生じ", "pos": "た。", "neg": "ずに経過した。"},
    {"pre": "家族歴に", "mid": "の既往があ", "pos": "る。", "neg": "るか定かではない。"},
    {"pre": "既往歴に", "mid": "を認め", "pos": "ている。", "neg": "るものはなかった。", "slot": "pair"},
    {"pre": "診察で", "mid": "の併発を疑", "pos": "った。", "neg": "う余地はなかった。", "slot": "pair"}
  ],
  "connector": "と",
  "rare_code_prefix": "R",
  "n_ratio": 0.14,
  "rare_rate": 0.06,
  "sentences_per_doc": [3, 5]
})json";

constexpr const char* kAdversarialSpec = R"json({
  "entities": [
    {"surface": "心房細動", "code": "I48"},
    {"surface": "肺炎", "code": "J18"},
    {"surface": "胃癌", "code": "C16"},
    {"surface": "脳梗塞", "code": "I63"},
    {"surface": "心不全", "code": "I50"},
    {"surface": "糖尿病", "code": "E14"},
    {"surface": "肝硬変", "code": "K74"},
    {"surface": "胆石症", "code": "K80"},
    {"surface": "腎不全", "code": "N19"},
    {"surface": "大腸癌", "code": "C18"},
    {"surface": "肺結核", "code": "A16"},
    {"surface": "膵炎", "code": "K85"},
    {"surface": "貧血", "code": "D64"},
    {"surface": "白血病", "code": "C95"},
    {"surface": "高血圧症", "code": "I10"},
    {"surface": "狭心症", "code": "I20"},
    {"surface": "肺水腫", "code": "J81"},
    {"surface": "不整脈", "code": "I49"},
    {"surface": "発熱", "gazetteer": false},
    {"surface": "めまい", "gazetteer": false},
    {"surface": "頭痛", "gazetteer": false}
  ],
  "decoys": ["抗生剤", "利尿薬", "造影剤", "内視鏡", "心電図", "聴診器", "点滴"],
  "rare_entities": {"count": 160, "len": [3, 5],
    "alphabet": "心房細動肺炎胃癌腫瘍梗塞出血狭窄潰閉症瘤栓脈結節変硬化不全熱膿胞嚢胆管腎肝脳膵貧圧糖尿石腸核水斑疹"},
  "gen_decoys": {"count": 160, "len": [3, 5],
    "alphabet": "心房細動肺炎胃癌腫瘍梗塞出血狭窄潰閉症瘤栓脈結節変硬化不全熱膿胞嚢胆管腎肝脳膵貧圧糖尿石腸核水斑疹"},
  "templates": [
    {"pre": "患者は", "mid": "を認め", "pos": "た。", "neg": "なかった。"},
    {"pre": "入院時より", "mid": "の所見があ", "pos": "った。", "neg": "るとは言えず。"},
    {"pre": "経過中に", "mid": "を指摘され", "pos": "た。", "neg": "ることはなかった。"},
    {"pre": "検査では", "mid": "の像を呈し", "pos": "ていた。", "neg": "ているとは考えにくい。"},
    {"pre": "本人は以前より", "mid": "があると述べ", "pos": "ていた。", "neg": "たことは一度もない。"},
    {"pre": "画像上", "mid": "の合併は", "pos": "明らかであった。", "neg": "否定的であった。"},
    {"pre": "術後に", "mid": "を生じ", "pos": "た。", "neg": "ずに経過した。"},
    {"pre": "家族歴に", "mid": "の既往があ", "pos": "る。", "neg": "るか定かではない。"},
    {"pre": "既往歴に", "mid": "を認め", "pos": "ている。", "neg": "るものはなかった。", "slot": "pair"},
    {"pre": "診察で", "mid": "の併発を疑", "pos": "った。", "neg": "う余地はなかった。", "slot": "pair"},
    {"pre": "腹部には", "mid": "が混在し", "pos": "ていた。", "neg": "ているとは見なされなかった。", "slot": "abut"},
    {"pre": "読影上", "mid": "の併存を報告し", "pos": "た。", "neg": "なかった。", "slot": "abut"}
  ],
  "connector": "と",
  "rare_code_prefix": "R",
  "n_ratio": 0.14,
  "rare_rate": 0.28,
  "sentences_per_doc": [3, 5]
})json";

}  // namespace

const SynthSpec& standard_synth_spec() {
  static const SynthSpec spec = SynthSpec::from_json_text(kStandardSpec);
  return spec;
}

const SynthSpec& adversarial_synth_spec() {
  static const SynthSpec spec = SynthSpec::from_json_text(kAdversarialSpec);
  return spec;
}

}  // namespace dner
