#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dner {

// Token inventory with a reserved unknown slot at index 0 and stable
// insertion-ordered indices from 1 upward.  Frequencies count training-time
// occurrences (the unknown slot's stays 0).
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr const char* kUnkToken = "<UNK>";

  Vocabulary();

  // Inserts the token (or bumps the count of an existing one); returns index.
  std::size_t add(const std::string& token);
  // Index of the token, kUnk when absent.
  std::size_t lookup(const std::string& token) const;
  std::optional<std::size_t> find(const std::string& token) const;

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  std::uint64_t freq(std::size_t i) const { return freqs_.at(i); }

  // Deserialization: tokens[0] must be the unknown sentinel.
  static Vocabulary from_entries(std::vector<std::string> tokens,
                                 std::vector<std::uint64_t> freqs);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dner
