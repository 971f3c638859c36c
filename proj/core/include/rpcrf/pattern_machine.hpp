#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rpcrf/alphabet.hpp"
#include "rpcrf/automata.hpp"
#include "rpcrf/pattern.hpp"

namespace rpcrf {

struct CompiledPattern {
  int id = 0;
  PatternAst ast;
  Dfa core;          // minimal DFA of the core language
  Dfa dfa;           // suffix-closed automaton used in the product
  bool anchored_end = false;
  bool matches_empty = false;
};

/// Patterns over one shared alphabet; ids follow declaration order.
struct PatternSet {
  Alphabet alphabet;
  std::vector<CompiledPattern> patterns;
  /// Non-fatal diagnostics produced while compiling (e.g. empty matches).
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return patterns.size(); }
};

CompiledPattern compile_pattern(int id, std::string_view text, const Alphabet& alphabet);
PatternSet build_pattern_set(const Alphabet& alphabet,
                             const std::vector<std::string>& texts);
PatternSet build_pattern_set(const PatternFile& file);

struct Arc {
  int source = 0;
  Symbol symbol = 0;
  int target = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct MachineState {
  std::vector<int> components;  // one state per pattern automaton
  std::vector<int> labels;      // sorted ids of patterns accepting here

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

inline constexpr std::size_t kDefaultMaxStates = 1'000'000;

/// State-labeled product of the suffix-closed pattern automata, restricted to
/// states reachable from the initial tuple. Arc ids are dense and ordered by
/// (source, symbol), so arc id == source * symbol_count + symbol.
class PatternMachine {
 public:
  PatternMachine() = default;
  PatternMachine(int symbol_count, std::vector<MachineState> states,
                 std::vector<int> table, std::vector<char> end_anchored);

  int state_count() const noexcept { return static_cast<int>(states_.size()); }
  int symbol_count() const noexcept { return symbol_count_; }
  int pattern_count() const noexcept { return static_cast<int>(end_anchored_.size()); }
  int arc_count() const noexcept { return static_cast<int>(arcs_.size()); }
  int initial() const noexcept { return 0; }

  int next(int state, Symbol symbol) const {
    return table_[static_cast<std::size_t>(state * symbol_count_ + symbol)];
  }
  int arc_id(int state, Symbol symbol) const { return state * symbol_count_ + symbol; }
  const Arc& arc(int id) const { return arcs_[static_cast<std::size_t>(id)]; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  /// Arc ids whose target is `state`, ascending.
  const std::vector<int>& arcs_into(int state) const {
    return in_arcs_[static_cast<std::size_t>(state)];
  }

  const MachineState& state(int q) const { return states_[static_cast<std::size_t>(q)]; }
  const std::vector<MachineState>& states() const noexcept { return states_; }
  const std::vector<int>& table() const noexcept { return table_; }
  const std::vector<int>& labels(int q) const { return state(q).labels; }
  bool end_anchored(int pattern_id) const {
    return end_anchored_[static_cast<std::size_t>(pattern_id)] != 0;
  }
  const std::vector<char>& end_anchored_flags() const noexcept { return end_anchored_; }

  /// Patterns that fire when a length-`length` sequence reaches `q` at
  /// 1-based position `i`: labels(q) minus end-anchored ids unless i == length.
  std::vector<int> fired_labels(int q, int i, int length) const;

  friend bool operator==(const PatternMachine&, const PatternMachine&) = default;

 private:
  int symbol_count_ = 0;
  std::vector<MachineState> states_;
  std::vector<int> table_;
  std::vector<char> end_anchored_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> in_arcs_;
};

/// Breadth-first product construction over the symbols in id order. Throws
/// CapacityError once more than `max_states` states are discovered.
PatternMachine build_pattern_machine(const PatternSet& patterns,
                                     std::size_t max_states = kDefaultMaxStates);

/// Arc ids of the unique run over y.
std::vector<int> path_of(const PatternMachine& machine, const LabelSeq& y);
/// Pattern ids firing at each position of y (end anchoring applied).
std::vector<std::vector<int>> fired_patterns(const PatternMachine& machine,
                                             const LabelSeq& y);

/// Graphviz rendering with each state annotated by its pattern-id set.
std::string to_dot(const PatternMachine& machine, const Alphabet& alphabet,
                   const std::string& name = "machine");

}  // namespace rpcrf
