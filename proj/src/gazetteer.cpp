#include "dner/gazetteer.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "dner/errors.hpp"
#include "dner/utf8.hpp"

namespace dner {

int Gazetteer::child(int node, char32_t ch) const {
  const auto& next = trie_[static_cast<std::size_t>(node)].next;
  auto it = std::lower_bound(next.begin(), next.end(), ch,
                             [](const auto& p, char32_t c) { return p.first < c; });
  if (it != next.end() && it->first == ch) return it->second;
  return -1;
}

int& Gazetteer::child_slot(int node, char32_t ch) {
  auto& next = trie_[static_cast<std::size_t>(node)].next;
  auto it = std::lower_bound(next.begin(), next.end(), ch,
                             [](const auto& p, char32_t c) { return p.first < c; });
  if (it != next.end() && it->first == ch) return it->second;
  it = next.insert(it, {ch, -1});
  return it->second;
}

void Gazetteer::add(std::u32string surface, std::string code) {
  if (surface.empty()) throw DataError("gazetteer: empty surface");
  if (code.empty()) throw DataError("gazetteer: empty code");
  int node = 0;
  for (char32_t ch : surface) {
    int& slot = child_slot(node, ch);
    if (slot < 0) {
      slot = static_cast<int>(trie_.size());
      trie_.push_back(TrieNode{});
    }
    node = slot;
  }
  TrieNode& end = trie_[static_cast<std::size_t>(node)];
  if (end.entry >= 0) return;  // first-loaded surface wins
  end.entry = static_cast<int>(entries_.size());
  entries_.push_back({std::move(surface), std::move(code)});
  links_built_ = false;
}

Gazetteer Gazetteer::parse(const std::string& text) {
  Gazetteer g;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw DataError("gazetteer line " + std::to_string(lineno) +
                      ": expected SURFACE\\tCODE");
    g.add(decode_utf8(line.substr(0, tab)), line.substr(tab + 1));
  }
  return g;
}

Gazetteer Gazetteer::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open gazetteer file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string Gazetteer::serialize() const {
  std::string out;
  for (const GazetteerEntry& e : entries_) {
    out += encode_utf8(e.surface);
    out += '\t';
    out += e.code;
    out += '\n';
  }
  return out;
}

bool Gazetteer::contains_match(const std::u32string& text) const {
  return !find_all(text).empty();
}

void Gazetteer::build_links() const {
  if (links_built_) return;
  trie_[0].fail = 0;
  trie_[0].dict_link = 0;
  std::deque<int> queue;
  for (auto& [ch, c] : trie_[0].next) {
    trie_[static_cast<std::size_t>(c)].fail = 0;
    trie_[static_cast<std::size_t>(c)].dict_link = 0;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    int node = queue.front();
    queue.pop_front();
    for (auto& [ch, c] : trie_[static_cast<std::size_t>(node)].next) {
      // Longest proper suffix of this child that is also a trie path.
      int fail = trie_[static_cast<std::size_t>(node)].fail;
      while (fail != 0 && child(fail, ch) < 0)
        fail = trie_[static_cast<std::size_t>(fail)].fail;
      int target = child(fail, ch);
      int cf = (target >= 0 && target != c) ? target : 0;
      TrieNode& cn = trie_[static_cast<std::size_t>(c)];
      cn.fail = cf;
      const TrieNode& fn = trie_[static_cast<std::size_t>(cf)];
      cn.dict_link = fn.entry >= 0 ? cf : fn.dict_link;
      queue.push_back(c);
    }
  }
  links_built_ = true;
}

std::vector<GazetteerMatch> Gazetteer::find_all(const std::u32string& text) const {
  std::vector<GazetteerMatch> matches;
  if (entries_.empty()) return matches;
  build_links();
  int node = 0;
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    char32_t ch = text[pos];
    while (node != 0 && child(node, ch) < 0)
      node = trie_[static_cast<std::size_t>(node)].fail;
    int next = child(node, ch);
    node = next >= 0 ? next : 0;
    // Report every dictionary surface ending at this position, longest first.
    int v = trie_[static_cast<std::size_t>(node)].entry >= 0
                ? node
                : trie_[static_cast<std::size_t>(node)].dict_link;
    while (v != 0) {
      const TrieNode& vn = trie_[static_cast<std::size_t>(v)];
      const GazetteerEntry& entry = entries_[static_cast<std::size_t>(vn.entry)];
      matches.push_back({pos + 1 - entry.surface.size(), entry.surface.size(),
                         entry.code});
      v = vn.dict_link;
    }
  }
  return matches;
}

std::vector<GazetteerMatch> Gazetteer::find_nonoverlapping(
    const std::u32string& text) const {
  std::vector<GazetteerMatch> all = find_all(text);
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (all[a].start != all[b].start) return all[a].start < all[b].start;
    if (all[a].length != all[b].length) return all[a].length > all[b].length;
    return a < b;  // discovery order
  });
  std::vector<GazetteerMatch> picked;
  std::size_t covered = 0;  // first position not yet claimed
  for (std::size_t i : order) {
    if (all[i].start < covered) continue;
    picked.push_back(all[i]);
    covered = all[i].start + all[i].length;
  }
  return picked;
}

void Gazetteer::annotate(Sentence& sentence) const {
  std::vector<GazetteerMatch> matches = find_nonoverlapping(sentence.text());
  for (CharRecord& r : sentence.records) r.icd.clear();
  for (const GazetteerMatch& m : matches)
    for (std::size_t i = 0; i < m.length; ++i)
      sentence.records[m.start + i].icd = m.code;
}

void Gazetteer::annotate(std::span<Document> docs) const {
  for (Document& d : docs)
    for (Sentence& s : d.sentences) annotate(s);
}

}  // namespace dner
