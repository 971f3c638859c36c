#include "rpcrf/pattern_machine.hpp"

#include <map>
#include <sstream>

#include "rpcrf/error.hpp"

namespace rpcrf {

namespace {
std::size_t idx(int v) { return static_cast<std::size_t>(v); }
}  // namespace

CompiledPattern compile_pattern(int id, std::string_view text, const Alphabet& alphabet) {
  CompiledPattern p;
  p.id = id;
  p.ast = parse_pattern(text, alphabet);
  p.core = minimize(determinize(compile_to_nfa(p.ast, alphabet), alphabet));
  p.matches_empty = p.core.is_accepting(p.core.initial);
  p.dfa = suffix_closure(p.core, p.ast.anchored_start, alphabet);
  p.anchored_end = p.ast.anchored_end;
  return p;
}

PatternSet build_pattern_set(const Alphabet& alphabet,
                             const std::vector<std::string>& texts) {
  PatternSet set;
  set.alphabet = alphabet;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    set.patterns.push_back(compile_pattern(static_cast<int>(i), texts[i], alphabet));
    if (set.patterns.back().matches_empty)
      set.warnings.push_back("pattern " + std::to_string(i) + " \"" + texts[i] +
                             "\" matches the empty sequence; empty matches never fire");
  }
  return set;
}

PatternSet build_pattern_set(const PatternFile& file) {
  return build_pattern_set(file.alphabet, file.patterns);
}

PatternMachine::PatternMachine(int symbol_count, std::vector<MachineState> states,
                               std::vector<int> table, std::vector<char> end_anchored)
    : symbol_count_(symbol_count),
      states_(std::move(states)),
      table_(std::move(table)),
      end_anchored_(std::move(end_anchored)) {
  const int n = state_count();
  if (symbol_count_ <= 0 || n <= 0 || table_.size() != idx(n) * idx(symbol_count_))
    throw DataError("pattern machine: transition table does not match state count");
  arcs_.reserve(table_.size());
  in_arcs_.assign(idx(n), {});
  for (int q = 0; q < n; ++q)
    for (Symbol a = 0; a < symbol_count_; ++a) {
      const int r = next(q, a);
      if (r < 0 || r >= n) throw DataError("pattern machine: transition out of range");
      in_arcs_[idx(r)].push_back(static_cast<int>(arcs_.size()));
      arcs_.push_back({q, a, r});
    }
  for (const auto& s : states_)
    for (int l : s.labels)
      if (l < 0 || l >= pattern_count())
        throw DataError("pattern machine: state label out of range");
}

std::vector<int> PatternMachine::fired_labels(int q, int i, int length) const {
  std::vector<int> out;
  for (int l : labels(q))
    if (i == length || !end_anchored(l)) out.push_back(l);
  return out;
}

PatternMachine build_pattern_machine(const PatternSet& patterns, std::size_t max_states) {
  const int k = static_cast<int>(patterns.alphabet.size());
  const std::size_t m = patterns.size();
  for (const auto& p : patterns.patterns)
    if (p.dfa.symbol_count != k)
      throw DataError("pattern " + std::to_string(p.id) + " uses a different alphabet");

  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> tuples;
  auto intern = [&](std::vector<int> tuple) {
    auto [it, inserted] = ids.try_emplace(tuple, static_cast<int>(tuples.size()));
    if (inserted) {
      if (tuples.size() >= max_states)
        throw CapacityError("pattern machine exceeds " + std::to_string(max_states) +
                            " states");
      tuples.push_back(std::move(tuple));
    }
    return it->second;
  };

  std::vector<int> start(m);
  for (std::size_t j = 0; j < m; ++j) start[j] = patterns.patterns[j].dfa.initial;
  intern(std::move(start));

  std::vector<int> table;
  for (std::size_t head = 0; head < tuples.size(); ++head) {
    for (Symbol a = 0; a < k; ++a) {
      std::vector<int> succ(m);
      for (std::size_t j = 0; j < m; ++j)
        succ[j] = patterns.patterns[j].dfa.next(tuples[head][j], a);
      table.push_back(intern(std::move(succ)));
    }
  }

  std::vector<MachineState> states(tuples.size());
  for (std::size_t q = 0; q < tuples.size(); ++q) {
    states[q].components = tuples[q];
    for (std::size_t j = 0; j < m; ++j)
      if (patterns.patterns[j].dfa.is_accepting(tuples[q][j]))
        states[q].labels.push_back(static_cast<int>(j));
  }
  std::vector<char> end_anchored(m);
  for (std::size_t j = 0; j < m; ++j) end_anchored[j] = patterns.patterns[j].anchored_end;
  return PatternMachine(k, std::move(states), std::move(table), std::move(end_anchored));
}

std::vector<int> path_of(const PatternMachine& machine, const LabelSeq& y) {
  std::vector<int> path;
  path.reserve(y.size());
  int q = machine.initial();
  for (Symbol s : y) {
    if (s < 0 || s >= machine.symbol_count())
      throw AlphabetError("symbol id " + std::to_string(s) + " outside alphabet");
    const int arc = machine.arc_id(q, s);
    path.push_back(arc);
    q = machine.arc(arc).target;
  }
  return path;
}

std::vector<std::vector<int>> fired_patterns(const PatternMachine& machine,
                                             const LabelSeq& y) {
  const auto path = path_of(machine, y);
  const int n = static_cast<int>(path.size());
  std::vector<std::vector<int>> out;
  out.reserve(path.size());
  for (int i = 1; i <= n; ++i)
    out.push_back(machine.fired_labels(machine.arc(path[idx(i - 1)]).target, i, n));
  return out;
}

std::string to_dot(const PatternMachine& machine, const Alphabet& alphabet,
                   const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  start [shape=point];\n";
  for (int q = 0; q < machine.state_count(); ++q) {
    const auto& labels = machine.labels(q);
    os << "  q" << q << " [shape=" << (labels.empty() ? "circle" : "doublecircle")
       << ", label=\"q" << q << "\\n{";
    for (std::size_t j = 0; j < labels.size(); ++j) os << (j ? "," : "") << labels[j];
    os << "}\"];\n";
  }
  os << "  start -> q" << machine.initial() << ";\n";
  for (const Arc& arc : machine.arcs())
    os << "  q" << arc.source << " -> q" << arc.target << " [label=\""
       << alphabet.symbol(arc.symbol) << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace rpcrf
