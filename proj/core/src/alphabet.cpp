#include "rpcrf/alphabet.hpp"

#include "rpcrf/error.hpp"

namespace rpcrf {

namespace {
std::size_t slot(char c) { return static_cast<unsigned char>(c); }
}  // namespace

Alphabet::Alphabet(std::string_view symbols) : symbols_(symbols) {
  if (symbols_.empty()) throw AlphabetError("alphabet must not be empty");
  index_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto& entry = index_[slot(symbols_[i])];
    if (entry != -1)
      throw AlphabetError(std::string("duplicate alphabet symbol '") +
                          symbols_[i] + "'");
    entry = static_cast<int>(i);
  }
}

bool Alphabet::contains(char c) const noexcept {
  return !symbols_.empty() && index_[slot(c)] >= 0;
}

Symbol Alphabet::id(char c) const {
  if (!contains(c))
    throw AlphabetError(std::string("symbol '") + c + "' is not in alphabet \"" +
                        symbols_ + "\"");
  return index_[slot(c)];
}

LabelSeq Alphabet::encode(std::string_view text) const {
  LabelSeq out;
  out.reserve(text.size());
  for (char c : text) out.push_back(id(c));
  return out;
}

std::string Alphabet::decode(const LabelSeq& labels) const {
  std::string out;
  out.reserve(labels.size());
  for (Symbol s : labels) out.push_back(symbol(s));
  return out;
}

}  // namespace rpcrf
