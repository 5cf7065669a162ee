#pragma once

// Dictionary matcher that projects disease-code annotations onto character
// sequences.  Entries are surface strings paired with a code; lookup finds all
// dictionary surfaces in a sentence with an Aho-Corasick automaton, then keeps
// a leftmost-longest non-overlapping subset and stamps each covered character
// with the matching entry's code.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dner/corpus.hpp"

namespace dner {

struct GazetteerEntry {
  std::u32string surface;
  std::string code;
};

struct GazetteerMatch {
  std::size_t start = 0;   // character offset
  std::size_t length = 0;  // in characters
  std::string code;
};

class Gazetteer {
 public:
  // Surfaces must be non-empty; a surface seen twice keeps its first code.
  void add(std::u32string surface, std::string code);

  // Lines of SURFACE\tCODE.  '#'-prefixed lines and blank lines are skipped.
  static Gazetteer load_file(const std::string& path);
  static Gazetteer parse(const std::string& text);

  std::size_t size() const { return entries_.size(); }
  std::span<const GazetteerEntry> entries() const { return entries_; }

  // SURFACE\tCODE lines in load order; parse(serialize()) round-trips.
  std::string serialize() const;

  // True if any entry surface occurs in `text`.
  bool contains_match(const std::u32string& text) const;

  // All dictionary occurrences in `text`, in automaton discovery order.
  std::vector<GazetteerMatch> find_all(const std::u32string& text) const;

  // Leftmost-longest non-overlapping selection from find_all.
  std::vector<GazetteerMatch> find_nonoverlapping(const std::u32string& text) const;

  // Writes the winning match's code into each covered record's icd field;
  // uncovered records get "".  Existing icd values are overwritten.
  void annotate(Sentence& sentence) const;
  void annotate(std::span<Document> docs) const;

 private:
  struct TrieNode {
    std::vector<std::pair<char32_t, int>> next;  // sorted by character
    int fail = 0;
    int entry = -1;     // index into entries_ ending here
    int dict_link = 0;  // nearest fail-link ancestor holding an entry (0 = none)
  };

  int child(int node, char32_t ch) const;
  int& child_slot(int node, char32_t ch);
  void build_links() const;

  std::vector<GazetteerEntry> entries_;
  mutable std::vector<TrieNode> trie_{TrieNode{}};
  mutable bool links_built_ = false;
};

}  // namespace dner
