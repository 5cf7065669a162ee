#include "dner/vocab.hpp"

#include "dner/errors.hpp"

namespace dner {

Vocabulary::Vocabulary() {
  tokens_.push_back(kUnkToken);
  freqs_.push_back(0);
  index_[kUnkToken] = kUnk;
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, tokens_.size());
  if (inserted) {
    tokens_.push_back(token);
    freqs_.push_back(1);
  } else {
    ++freqs_[it->second];
  }
  return it->second;
}

std::size_t Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> tokens,
                                    std::vector<std::uint64_t> freqs) {
  if (tokens.empty() || tokens[0] != kUnkToken)
    throw DataError("vocabulary: first entry must be the unknown sentinel");
  if (tokens.size() != freqs.size())
    throw DataError("vocabulary: token and frequency lists differ in length");
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.freqs_ = std::move(freqs);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second)
      throw DataError("vocabulary: duplicate token '" + v.tokens_[i] + "'");
  }
  return v;
}

}  // namespace dner
