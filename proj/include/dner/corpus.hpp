#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dner/tags.hpp"

namespace dner {

// Coarse Japanese character classes. Everything outside the kanji, hiragana
// and katakana blocks (ASCII, fullwidth alphanumerics, punctuation,
// whitespace) falls into A, keeping the class dictionary at exactly four
// entries.
enum class CharType : int { C = 0, H = 1, K = 2, A = 3 };

inline constexpr int kNumCharTypes = 4;

CharType classify_char_type(char32_t ch);
char char_type_letter(CharType t);
std::optional<CharType> parse_char_type(std::string_view s);

struct CharRecord {
  char32_t ch = 0;
  CharType ctype = CharType::A;
  std::string icd;               // empty = no code
  std::optional<Tag> tag;        // gold tag; absent for unlabeled text
  std::optional<Tag> pred;       // predicted tag in prediction files
};

struct Sentence {
  std::vector<CharRecord> records;

  std::size_t size() const { return records.size(); }
  std::u32string text() const;
  std::vector<Tag> tags() const;       // throws DataError if any is missing
  std::vector<Tag> pred_tags() const;  // throws DataError if any is missing
  bool has_tags() const;
  bool has_preds() const;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
};

// Column corpus file:
//   #doc <id>
//   CHAR<TAB>ICD<TAB>CTYPE<TAB>TAG[<TAB>PRED]
//   ...
//   (blank line ends a sentence)
// ICD is "-" for no code. CTYPE is C/H/K/A, or "-" to derive it from the
// character. The TAG column is optional (unlabeled text) and may be "-" when
// only the fifth, predicted-tag column is meaningful. Errors name the
// offending 1-based line.
struct ParseOptions {
  bool require_tags = false;
  bool require_preds = false;
  // Reject gold tag sequences that violate IOB2.
  bool strict_iob2 = true;
};

std::vector<Document> parse_corpus(std::istream& in, const ParseOptions& opts = {});
std::vector<Document> parse_corpus_file(const std::string& path,
                                        const ParseOptions& opts = {});

std::string write_corpus(std::span<const Document> docs);
void write_corpus_file(const std::string& path, std::span<const Document> docs);

// Deterministic partition of document indices into k folds whose sizes
// differ by at most one. Same seed, same partition.
std::vector<std::vector<std::size_t>> split_folds(std::size_t n_docs, int k,
                                                  std::uint64_t seed);

std::size_t count_sentences(std::span<const Document> docs);

}  // namespace dner
