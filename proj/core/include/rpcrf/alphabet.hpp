#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rpcrf {

using Symbol = int;
using LabelSeq = std::vector<Symbol>;

/// Ordered set of single-character labels. Position in the declaration fixes
/// the integer id of each label.
class Alphabet {
 public:
  Alphabet() = default;
  /// Throws AlphabetError on an empty or duplicated declaration.
  explicit Alphabet(std::string_view symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  bool contains(char c) const noexcept;

  /// Id of `c`; throws AlphabetError when `c` is not declared.
  Symbol id(char c) const;
  char symbol(Symbol id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  const std::string& symbols() const noexcept { return symbols_; }

  LabelSeq encode(std::string_view text) const;
  std::string decode(const LabelSeq& labels) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::string symbols_;
  std::array<int, 256> index_{};
};

}  // namespace rpcrf
