#include "rpcrf/automata.hpp"

#include <deque>
#include <map>
#include <sstream>

#include "rpcrf/error.hpp"

namespace rpcrf {

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

class EpsilonClosure {
 public:
  explicit EpsilonClosure(const Nfa& nfa)
      : epsilon_(idx(nfa.state_count)), moves_(idx(nfa.state_count)) {
    for (const auto& t : nfa.transitions) {
      if (t.symbol == kEpsilon)
        epsilon_[idx(t.from)].push_back(t.to);
      else
        moves_[idx(t.from)].push_back({t.symbol, t.to});
    }
    mark_.assign(idx(nfa.state_count), 0);
  }

  std::vector<int> close(std::vector<int> seeds) {
    std::vector<int> out;
    std::fill(mark_.begin(), mark_.end(), 0);
    for (int s : seeds) mark_[idx(s)] = 1;
    while (!seeds.empty()) {
      const int s = seeds.back();
      seeds.pop_back();
      out.push_back(s);
      for (int t : epsilon_[idx(s)]) {
        if (!mark_[idx(t)]) {
          mark_[idx(t)] = 1;
          seeds.push_back(t);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> step(const std::vector<int>& states, Symbol symbol) const {
    std::vector<int> out;
    for (int s : states)
      for (const auto& [sym, to] : moves_[idx(s)])
        if (sym == symbol) out.push_back(to);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::vector<std::vector<int>> epsilon_;
  std::vector<std::vector<std::pair<Symbol, int>>> moves_;
  std::vector<char> mark_;
};

}  // namespace

int Dfa::run(const LabelSeq& word) const {
  int q = initial;
  for (Symbol s : word) {
    if (s < 0 || s >= symbol_count)
      throw AlphabetError("symbol id " + std::to_string(s) + " outside alphabet");
    q = next(q, s);
  }
  return q;
}

bool Dfa::complete() const {
  if (state_count <= 0 || symbol_count <= 0) return false;
  if (table.size() != idx(state_count) * idx(symbol_count)) return false;
  if (accepting.size() != idx(state_count)) return false;
  if (initial < 0 || initial >= state_count) return false;
  for (int t : table)
    if (t < 0 || t >= state_count) return false;
  return true;
}

Dfa determinize(const Nfa& nfa, const Alphabet& alphabet) {
  const int k = static_cast<int>(alphabet.size());
  EpsilonClosure closure(nfa);
  std::vector<char> nfa_accepting(idx(nfa.state_count), 0);
  for (int a : nfa.accepting) nfa_accepting[idx(a)] = 1;

  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> subsets;
  std::deque<int> queue;
  auto intern = [&](std::vector<int> subset) {
    auto [it, inserted] = ids.try_emplace(subset, static_cast<int>(subsets.size()));
    if (inserted) {
      subsets.push_back(std::move(subset));
      queue.push_back(it->second);
    }
    return it->second;
  };

  Dfa dfa;
  dfa.symbol_count = k;
  dfa.initial = intern(closure.close({nfa.initial}));
  while (!queue.empty()) {
    const int q = queue.front();
    queue.pop_front();
    if (dfa.table.size() < idx(q + 1) * idx(k)) dfa.table.resize(idx(q + 1) * idx(k), -1);
    for (Symbol a = 0; a < k; ++a) {
      const int target = intern(closure.close(closure.step(subsets[idx(q)], a)));
      dfa.table[idx(q * k + a)] = target;
    }
  }
  dfa.state_count = static_cast<int>(subsets.size());
  dfa.table.resize(idx(dfa.state_count) * idx(k), -1);
  dfa.accepting.assign(idx(dfa.state_count), 0);
  for (int q = 0; q < dfa.state_count; ++q)
    for (int s : subsets[idx(q)])
      if (nfa_accepting[idx(s)]) dfa.accepting[idx(q)] = 1;
  return dfa;
}

Dfa minimize(const Dfa& dfa) {
  const int k = dfa.symbol_count;

  // Reachable states, in BFS order.
  std::vector<int> order;
  std::vector<char> seen(idx(dfa.state_count), 0);
  order.push_back(dfa.initial);
  seen[idx(dfa.initial)] = 1;
  for (std::size_t head = 0; head < order.size(); ++head)
    for (Symbol a = 0; a < k; ++a) {
      const int t = dfa.next(order[head], a);
      if (!seen[idx(t)]) {
        seen[idx(t)] = 1;
        order.push_back(t);
      }
    }

  // Moore refinement: split blocks by (block, successor blocks) signature
  // until the block count stops growing.
  std::vector<int> block(idx(dfa.state_count), -1);
  for (int q : order) block[idx(q)] = dfa.is_accepting(q) ? 1 : 0;
  std::size_t blocks = 0;
  while (true) {
    std::map<std::vector<int>, int> signatures;
    std::vector<int> refined(block.size(), -1);
    for (int q : order) {
      std::vector<int> sig;
      sig.reserve(idx(k) + 1);
      sig.push_back(block[idx(q)]);
      for (Symbol a = 0; a < k; ++a) sig.push_back(block[idx(dfa.next(q, a))]);
      auto [it, _] = signatures.try_emplace(std::move(sig),
                                            static_cast<int>(signatures.size()));
      refined[idx(q)] = it->second;
    }
    block = std::move(refined);
    if (signatures.size() == blocks) break;
    blocks = signatures.size();
  }

  // Canonical numbering: BFS over blocks from the initial block.
  std::vector<int> representative(blocks, -1);
  for (int q : order)
    if (representative[idx(block[idx(q)])] < 0) representative[idx(block[idx(q)])] = q;
  std::vector<int> number(blocks, -1);
  std::vector<int> queue{block[idx(dfa.initial)]};
  number[idx(queue.front())] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int rep = representative[idx(queue[head])];
    for (Symbol a = 0; a < k; ++a) {
      const int b = block[idx(dfa.next(rep, a))];
      if (number[idx(b)] < 0) {
        number[idx(b)] = static_cast<int>(queue.size());
        queue.push_back(b);
      }
    }
  }

  Dfa out;
  out.state_count = static_cast<int>(queue.size());
  out.symbol_count = k;
  out.initial = 0;
  out.table.assign(idx(out.state_count) * idx(k), -1);
  out.accepting.assign(idx(out.state_count), 0);
  for (int b : queue) {
    const int rep = representative[idx(b)];
    const int q = number[idx(b)];
    out.accepting[idx(q)] = dfa.accepting[idx(rep)];
    for (Symbol a = 0; a < k; ++a)
      out.table[idx(q * k + a)] = number[idx(block[idx(dfa.next(rep, a))])];
  }
  return out;
}

Dfa suffix_closure(const Dfa& core, bool anchored_start, const Alphabet& alphabet) {
  if (anchored_start) return core;
  // States: the core, a Sigma self-loop, and a non-accepting copy of the core's
  // initial state as the entry point, so an empty match never fires.
  const int k = core.symbol_count;
  const int loop = core.state_count;
  const int entry = core.state_count + 1;
  Nfa nfa;
  nfa.state_count = core.state_count + 2;
  nfa.initial = loop;
  for (int q = 0; q < core.state_count; ++q)
    for (Symbol a = 0; a < k; ++a) nfa.transitions.push_back({q, a, core.next(q, a)});
  for (Symbol a = 0; a < k; ++a) {
    nfa.transitions.push_back({loop, a, loop});
    nfa.transitions.push_back({entry, a, core.next(core.initial, a)});
  }
  nfa.transitions.push_back({loop, kEpsilon, entry});
  for (int q = 0; q < core.state_count; ++q)
    if (core.is_accepting(q)) nfa.accepting.push_back(q);
  return minimize(determinize(nfa, alphabet));
}

std::vector<int> match_end_positions(const Dfa& dfa, bool anchored_end,
                                     const LabelSeq& y) {
  std::vector<int> out;
  int q = dfa.initial;
  const int n = static_cast<int>(y.size());
  for (int i = 1; i <= n; ++i) {
    const Symbol s = y[idx(i - 1)];
    if (s < 0 || s >= dfa.symbol_count)
      throw AlphabetError("symbol id " + std::to_string(s) + " outside alphabet");
    q = dfa.next(q, s);
    if (dfa.is_accepting(q) && (!anchored_end || i == n)) out.push_back(i);
  }
  return out;
}

std::string to_dot(const Dfa& dfa, const Alphabet& alphabet, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n  rankdir=LR;\n  start [shape=point];\n";
  for (int q = 0; q < dfa.state_count; ++q)
    os << "  q" << q << " [shape=" << (dfa.is_accepting(q) ? "doublecircle" : "circle")
       << ", label=\"q" << q << "\"];\n";
  os << "  start -> q" << dfa.initial << ";\n";
  for (int q = 0; q < dfa.state_count; ++q)
    for (Symbol a = 0; a < dfa.symbol_count; ++a)
      os << "  q" << q << " -> q" << dfa.next(q, a) << " [label=\""
         << alphabet.symbol(a) << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace rpcrf
