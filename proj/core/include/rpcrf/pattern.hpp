#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rpcrf/alphabet.hpp"

namespace rpcrf {

/// One node of a parsed label pattern.
///
/// Literals, `.` and `[...]` all become `Set` nodes holding the sorted ids they
/// match; `form` only remembers how the set was written.
struct PatternNode {
  enum class Kind { Set, Concat, Alternate, Star, Plus, Optional, Repeat };
  enum class SetForm { Literal, Any, Class };

  Kind kind = Kind::Set;
  SetForm form = SetForm::Literal;
  std::vector<Symbol> symbols;
  std::vector<PatternNode> children;
  int min = 0;  // Repeat only
  int max = 0;  // Repeat only

  static PatternNode literal(Symbol s);
  static PatternNode set(std::vector<Symbol> ids, SetForm form);
  static PatternNode unary(Kind kind, PatternNode child);
  static PatternNode repeat(PatternNode child, int min, int max);
  static PatternNode nary(Kind kind, std::vector<PatternNode> children);

  friend bool operator==(const PatternNode&, const PatternNode&) = default;
};

struct PatternAst {
  PatternNode root;
  bool anchored_start = false;
  bool anchored_end = false;
  std::string source_text;
};

/// Largest count accepted inside `{k}` / `{m,n}`.
inline constexpr int kMaxRepeat = 256;

/// Parses `text` over `alphabet`.
///
/// Dialect: literals, `.`, `[..]` (ranges and leading `^` negation allowed),
/// concatenation, `|`, `*`, `+`, `?`, `{k}`, `{m,n}`, parentheses, a leading
/// `^` and a trailing `$`. A backslash escapes the next character. Throws
/// SyntaxError for malformed text and AlphabetError (carrying the offset in
/// its message) for symbols outside the alphabet.
PatternAst parse_pattern(std::string_view text, const Alphabet& alphabet);

inline constexpr Symbol kEpsilon = -1;

struct NfaTransition {
  int from = 0;
  Symbol symbol = kEpsilon;
  int to = 0;

  friend bool operator==(const NfaTransition&, const NfaTransition&) = default;
};

struct Nfa {
  int state_count = 0;
  std::vector<NfaTransition> transitions;
  int initial = 0;
  std::vector<int> accepting;  // sorted, distinct

  /// Epsilon-closure simulation.
  bool accepts(const LabelSeq& word) const;
  /// True when every state id is in range and `accepting` is sorted.
  bool valid() const;
};

/// Thompson construction of the core language (anchors are not encoded).
/// Bounded repeats are expanded by duplicating the repeated subexpression.
Nfa compile_to_nfa(const PatternAst& ast, const Alphabet& alphabet);

/// Contents of a pattern file: the declared alphabet plus pattern lines.
struct PatternFile {
  Alphabet alphabet;
  std::vector<std::string> patterns;
};

/// Format: `#` comment lines and blank lines are skipped; the first remaining
/// line must be `alphabet: <symbols>` (whitespace between symbols ignored);
/// every later line is one pattern with surrounding whitespace trimmed.
PatternFile parse_pattern_file(std::string_view text);
PatternFile load_pattern_file(const std::filesystem::path& path);

}  // namespace rpcrf
