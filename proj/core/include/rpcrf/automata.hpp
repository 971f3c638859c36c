#pragma once

#include <string>
#include <vector>

#include "rpcrf/alphabet.hpp"
#include "rpcrf/pattern.hpp"

namespace rpcrf {

/// Complete deterministic automaton with a dense state x symbol table.
struct Dfa {
  int state_count = 0;
  int symbol_count = 0;
  std::vector<int> table;        // table[state * symbol_count + symbol]
  int initial = 0;
  std::vector<char> accepting;   // one flag per state

  int next(int state, Symbol symbol) const {
    return table[static_cast<std::size_t>(state * symbol_count + symbol)];
  }
  bool is_accepting(int state) const {
    return accepting[static_cast<std::size_t>(state)] != 0;
  }
  /// State reached after consuming `word` from the initial state.
  int run(const LabelSeq& word) const;
  bool accepts(const LabelSeq& word) const { return is_accepting(run(word)); }
  /// Every (state, symbol) pair maps to a valid state.
  bool complete() const;

  friend bool operator==(const Dfa&, const Dfa&) = default;
};

/// Subset construction. The empty subset acts as the sink when it is reachable.
Dfa determinize(const Nfa& nfa, const Alphabet& alphabet);

/// Drops unreachable states, merges equivalent ones by partition refinement
/// and renumbers states in breadth-first order from the initial state (symbols
/// visited in id order), so equal languages yield identical tables.
Dfa minimize(const Dfa& dfa);

/// Automaton for Sigma* . L(core), or `core` itself when the pattern is
/// anchored at the start.
Dfa suffix_closure(const Dfa& core, bool anchored_start, const Alphabet& alphabet);

/// 1-based positions i such that the run over y_1..y_i ends in an accepting
/// state; with `anchored_end` only i = |y| may be reported.
std::vector<int> match_end_positions(const Dfa& dfa, bool anchored_end,
                                     const LabelSeq& y);

/// Graphviz rendering; accepting states are drawn as double circles.
std::string to_dot(const Dfa& dfa, const Alphabet& alphabet,
                   const std::string& name = "dfa");

}  // namespace rpcrf
