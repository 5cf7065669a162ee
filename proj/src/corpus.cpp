#include "dner/corpus.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "dner/errors.hpp"
#include "dner/rng.hpp"
#include "dner/utf8.hpp"

namespace dner {

CharType classify_char_type(char32_t ch) {
  struct Range {
    char32_t lo, hi;
  };
  // CJK Unified Ideographs and extensions, plus compatibility ideographs.
  static constexpr Range kKanji[] = {
      {0x4E00, 0x9FFF},   {0x3400, 0x4DBF},   {0xF900, 0xFAFF},
      {0x20000, 0x2A6DF}, {0x2A700, 0x2B73F}, {0x2B740, 0x2B81F},
      {0x2B820, 0x2CEAF}, {0x2CEB0, 0x2EBEF}, {0x2F800, 0x2FA1F},
      {0x30000, 0x3134F},
  };
  static constexpr Range kKatakana[] = {
      {0x30A0, 0x30FF},  // Katakana
      {0x31F0, 0x31FF},  // Katakana Phonetic Extensions
      {0xFF65, 0xFF9F},  // Halfwidth Katakana
  };
  for (const Range& r : kKanji)
    if (ch >= r.lo && ch <= r.hi) return CharType::C;
  if (ch >= 0x3040 && ch <= 0x309F) return CharType::H;  // Hiragana
  for (const Range& r : kKatakana)
    if (ch >= r.lo && ch <= r.hi) return CharType::K;
  return CharType::A;
}

char char_type_letter(CharType t) {
  switch (t) {
    case CharType::C: return 'C';
    case CharType::H: return 'H';
    case CharType::K: return 'K';
    case CharType::A: return 'A';
  }
  return '?';
}

std::optional<CharType> parse_char_type(std::string_view s) {
  if (s == "C") return CharType::C;
  if (s == "H") return CharType::H;
  if (s == "K") return CharType::K;
  if (s == "A") return CharType::A;
  return std::nullopt;
}

std::u32string Sentence::text() const {
  std::u32string s;
  s.reserve(records.size());
  for (const CharRecord& r : records) s.push_back(r.ch);
  return s;
}

std::vector<Tag> Sentence::tags() const {
  std::vector<Tag> out;
  out.reserve(records.size());
  for (const CharRecord& r : records) {
    if (!r.tag) throw DataError("sentence has untagged characters");
    out.push_back(*r.tag);
  }
  return out;
}

std::vector<Tag> Sentence::pred_tags() const {
  std::vector<Tag> out;
  out.reserve(records.size());
  for (const CharRecord& r : records) {
    if (!r.pred) throw DataError("sentence has characters without predictions");
    out.push_back(*r.pred);
  }
  return out;
}

bool Sentence::has_tags() const {
  for (const CharRecord& r : records)
    if (!r.tag) return false;
  return !records.empty();
}

bool Sentence::has_preds() const {
  for (const CharRecord& r : records)
    if (!r.pred) return false;
  return !records.empty();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

[[noreturn]] void parse_fail(std::size_t lineno, const std::string& msg) {
  throw DataError("corpus line " + std::to_string(lineno) + ": " + msg);
}

// 1-based position of the first IOB2 violation, or 0.
std::size_t first_iob2_violation(std::span<const Tag> tags) {
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (!tag_is_inside(tags[t])) continue;
    if (t == 0) return 1;
    Tag prev = tags[t - 1];
    if (tag_entity_type(prev) != tag_entity_type(tags[t])) return t + 1;
  }
  return 0;
}

}  // namespace

std::vector<Document> parse_corpus(std::istream& in, const ParseOptions& opts) {
  std::vector<Document> docs;
  Sentence current;
  std::vector<std::size_t> current_lines;
  std::size_t lineno = 0;
  bool saw_doc_header = false;

  auto flush_sentence = [&]() {
    if (current.records.empty()) return;
    if (docs.empty()) parse_fail(current_lines.front(), "character line before any #doc header");
    if (opts.require_tags && !current.has_tags())
      parse_fail(current_lines.front(), "missing TAG column in labeled corpus");
    if (opts.require_preds && !current.has_preds())
      parse_fail(current_lines.front(), "missing PREDICTED_TAG column");
    if (opts.strict_iob2 && current.has_tags()) {
      std::size_t pos = first_iob2_violation(current.tags());
      if (pos != 0)
        parse_fail(current_lines[pos - 1],
                   "IOB2 violation at sentence position " + std::to_string(pos));
    }
    docs.back().sentences.push_back(std::move(current));
    current = Sentence{};
    current_lines.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_sentence();
      continue;
    }
    if (line.rfind("#doc", 0) == 0) {
      flush_sentence();
      std::string rest = line.size() > 4 ? line.substr(4) : "";
      std::size_t sp = rest.find_first_not_of(' ');
      std::string id = sp == std::string::npos ? "" : rest.substr(sp);
      if (id.empty()) parse_fail(lineno, "#doc header without an id");
      for (const Document& d : docs)
        if (d.doc_id == id) parse_fail(lineno, "duplicate doc id '" + id + "'");
      docs.push_back(Document{id, {}});
      saw_doc_header = true;
      continue;
    }
    if (!saw_doc_header) parse_fail(lineno, "character line before any #doc header");

    std::vector<std::string> cols = split_tabs(line);
    if (cols.size() < 3 || cols.size() > 5)
      parse_fail(lineno, "expected 3 to 5 tab-separated columns, got " +
                             std::to_string(cols.size()));
    std::u32string ch = decode_utf8(cols[0]);
    if (ch.size() != 1)
      parse_fail(lineno, "CHAR column must hold exactly one character");

    CharRecord rec;
    rec.ch = ch[0];
    rec.icd = cols[1] == "-" ? "" : cols[1];
    if (cols[2] == "-") {
      rec.ctype = classify_char_type(rec.ch);
    } else {
      auto ct = parse_char_type(cols[2]);
      if (!ct) parse_fail(lineno, "unknown char type '" + cols[2] + "'");
      rec.ctype = *ct;
    }
    if (cols.size() >= 4 && cols[3] != "-") {
      auto tag = parse_tag(cols[3]);
      if (!tag) parse_fail(lineno, "unknown tag '" + cols[3] + "'");
      rec.tag = *tag;
    }
    if (cols.size() == 5) {
      auto tag = parse_tag(cols[4]);
      if (!tag) parse_fail(lineno, "unknown predicted tag '" + cols[4] + "'");
      rec.pred = *tag;
    }
    if (!current.records.empty()) {
      bool prev_tagged = current.records.back().tag.has_value();
      if (prev_tagged != rec.tag.has_value())
        parse_fail(lineno, "mixed tagged and untagged lines in one sentence");
      bool prev_pred = current.records.back().pred.has_value();
      if (prev_pred != rec.pred.has_value())
        parse_fail(lineno, "mixed predicted and plain lines in one sentence");
    }
    current.records.push_back(std::move(rec));
    current_lines.push_back(lineno);
  }
  flush_sentence();
  return docs;
}

std::vector<Document> parse_corpus_file(const std::string& path,
                                        const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  try {
    return parse_corpus(in, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string write_corpus(std::span<const Document> docs) {
  std::string out;
  for (const Document& d : docs) {
    out += "#doc ";
    out += d.doc_id;
    out += '\n';
    for (const Sentence& s : d.sentences) {
      for (const CharRecord& r : s.records) {
        out += encode_utf8(r.ch);
        out += '\t';
        out += r.icd.empty() ? "-" : r.icd;
        out += '\t';
        out += char_type_letter(r.ctype);
        if (r.tag || r.pred) {
          out += '\t';
          out += r.tag ? tag_name(*r.tag) : "-";
        }
        if (r.pred) {
          out += '\t';
          out += tag_name(*r.pred);
        }
        out += '\n';
      }
      out += '\n';
    }
  }
  return out;
}

void write_corpus_file(const std::string& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << write_corpus(docs);
  if (!out) throw DataError("short write to corpus file: " + path);
}

std::vector<std::vector<std::size_t>> split_folds(std::size_t n_docs, int k,
                                                  std::uint64_t seed) {
  if (k < 2) throw UsageError("split_folds: k must be at least 2");
  if (static_cast<std::size_t>(k) > n_docs)
    throw UsageError("split_folds: k = " + std::to_string(k) +
                     " exceeds document count " + std::to_string(n_docs));
  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;
  Rng rng = Rng::derive(seed, "folds");
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n_docs; ++i)
    folds[i % static_cast<std::size_t>(k)].push_back(order[i]);
  return folds;
}

std::size_t count_sentences(std::span<const Document> docs) {
  std::size_t n = 0;
  for (const Document& d : docs) n += d.sentences.size();
  return n;
}

}  // namespace dner
