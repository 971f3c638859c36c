#include "rpcrf/pattern.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "rpcrf/error.hpp"

namespace rpcrf {

PatternNode PatternNode::literal(Symbol s) {
  PatternNode n;
  n.kind = Kind::Set;
  n.form = SetForm::Literal;
  n.symbols = {s};
  return n;
}

PatternNode PatternNode::set(std::vector<Symbol> ids, SetForm form) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  PatternNode n;
  n.kind = Kind::Set;
  n.form = form;
  n.symbols = std::move(ids);
  return n;
}

PatternNode PatternNode::unary(Kind kind, PatternNode child) {
  PatternNode n;
  n.kind = kind;
  n.children.push_back(std::move(child));
  return n;
}

PatternNode PatternNode::repeat(PatternNode child, int min, int max) {
  PatternNode n = unary(Kind::Repeat, std::move(child));
  n.min = min;
  n.max = max;
  return n;
}

PatternNode PatternNode::nary(Kind kind, std::vector<PatternNode> children) {
  if (children.size() == 1) return std::move(children.front());
  PatternNode n;
  n.kind = kind;
  n.children = std::move(children);
  return n;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Alphabet& alphabet)
      : text_(text), alphabet_(alphabet) {}

  PatternAst parse() {
    PatternAst ast;
    ast.source_text = std::string(text_);
    if (text_.empty()) fail(0, "empty pattern");
    std::size_t end = text_.size();
    if (text_.front() == '^') {
      ast.anchored_start = true;
      pos_ = 1;
    }
    if (end > pos_ && text_.back() == '$' && !escaped(end - 1)) {
      ast.anchored_end = true;
      --end;
    }
    limit_ = end;
    if (pos_ >= limit_) fail(pos_, "pattern has no body");
    ast.root = parse_alternation();
    if (pos_ < limit_) {
      if (text_[pos_] == ')') fail(pos_, "unbalanced ')'");
      fail(pos_, std::string("unexpected '") + text_[pos_] + "'");
    }
    return ast;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& message) const {
    throw SyntaxError(at, message);
  }

  bool escaped(std::size_t at) const {
    std::size_t slashes = 0;
    while (at > slashes && text_[at - slashes - 1] == '\\') ++slashes;
    return slashes % 2 == 1;
  }

  bool at_end() const { return pos_ >= limit_; }
  char peek() const { return text_[pos_]; }

  Symbol lookup(char c, std::size_t at) const {
    if (!alphabet_.contains(c))
      throw AlphabetError("symbol '" + std::string(1, c) + "' at position " +
                          std::to_string(at) + " is not in alphabet \"" +
                          alphabet_.symbols() + "\"");
    return alphabet_.id(c);
  }

  PatternNode parse_alternation() {
    std::vector<PatternNode> branches;
    branches.push_back(parse_concatenation());
    while (!at_end() && peek() == '|') {
      ++pos_;
      branches.push_back(parse_concatenation());
    }
    return PatternNode::nary(PatternNode::Kind::Alternate, std::move(branches));
  }

  PatternNode parse_concatenation() {
    std::vector<PatternNode> items;
    while (!at_end() && peek() != '|' && peek() != ')')
      items.push_back(parse_postfix());
    if (items.empty()) fail(pos_, "empty expression");
    return PatternNode::nary(PatternNode::Kind::Concat, std::move(items));
  }

  PatternNode parse_postfix() {
    PatternNode node = parse_atom();
    while (!at_end()) {
      const char c = peek();
      if (c == '*') {
        node = PatternNode::unary(PatternNode::Kind::Star, std::move(node));
      } else if (c == '+') {
        node = PatternNode::unary(PatternNode::Kind::Plus, std::move(node));
      } else if (c == '?') {
        node = PatternNode::unary(PatternNode::Kind::Optional, std::move(node));
      } else if (c == '{') {
        const auto [lo, hi] = parse_bounds();
        node = PatternNode::repeat(std::move(node), lo, hi);
        continue;
      } else {
        break;
      }
      ++pos_;
    }
    return node;
  }

  int parse_int() {
    const std::size_t start = pos_;
    long value = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      value = value * 10 + (peek() - '0');
      if (value > kMaxRepeat)
        fail(start, "repeat count exceeds " + std::to_string(kMaxRepeat));
      ++pos_;
    }
    if (pos_ == start) fail(pos_, "expected a repeat count");
    return static_cast<int>(value);
  }

  std::pair<int, int> parse_bounds() {
    const std::size_t open = pos_++;
    const int lo = parse_int();
    int hi = lo;
    if (!at_end() && peek() == ',') {
      ++pos_;
      hi = parse_int();
    }
    if (at_end() || peek() != '}') fail(pos_, "expected '}'");
    ++pos_;
    if (hi < lo) fail(open, "repeat bounds {m,n} require m <= n");
    return {lo, hi};
  }

  PatternNode parse_atom() {
    const std::size_t at = pos_;
    const char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        PatternNode inner = parse_alternation();
        if (at_end() || peek() != ')') fail(at, "unbalanced '('");
        ++pos_;
        return inner;
      }
      case '[':
        return parse_class();
      case '.': {
        ++pos_;
        std::vector<Symbol> all(alphabet_.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Symbol>(i);
        return PatternNode::set(std::move(all), PatternNode::SetForm::Any);
      }
      case '\\': {
        if (pos_ + 1 >= limit_) fail(at, "dangling escape");
        pos_ += 2;
        return PatternNode::literal(lookup(text_[at + 1], at + 1));
      }
      case '*': case '+': case '?': case '{':
        fail(at, std::string("quantifier '") + c + "' has nothing to repeat");
      case '^':
        fail(at, "'^' is only allowed at the start of a pattern");
      case '$':
        fail(at, "'$' is only allowed at the end of a pattern");
      case ')': case ']': case '}':
        fail(at, std::string("unbalanced '") + c + "'");
      default:
        ++pos_;
        return PatternNode::literal(lookup(c, at));
    }
  }

  PatternNode parse_class() {
    const std::size_t open = pos_++;
    bool negated = false;
    if (!at_end() && peek() == '^') {
      negated = true;
      ++pos_;
    }
    std::vector<bool> member(alphabet_.size(), false);
    bool any_item = false;
    while (true) {
      if (at_end()) fail(open, "unterminated '['");
      char c = peek();
      if (c == ']' && any_item) {
        ++pos_;
        break;
      }
      std::size_t at = pos_;
      if (c == '\\') {
        if (pos_ + 1 >= limit_) fail(at, "dangling escape");
        c = text_[++pos_];
        at = pos_;
      }
      ++pos_;
      if (pos_ + 1 < limit_ && peek() == '-' && text_[pos_ + 1] != ']') {
        ++pos_;
        char hi = peek();
        if (hi == '\\') {
          if (pos_ + 1 >= limit_) fail(pos_, "dangling escape");
          hi = text_[++pos_];
        }
        ++pos_;
        if (static_cast<unsigned char>(hi) < static_cast<unsigned char>(c))
          fail(at, "reversed class range");
        bool hit = false;
        for (int ch = static_cast<unsigned char>(c);
             ch <= static_cast<unsigned char>(hi); ++ch) {
          const char sym = static_cast<char>(ch);
          if (alphabet_.contains(sym)) {
            member[static_cast<std::size_t>(alphabet_.id(sym))] = true;
            hit = true;
          }
        }
        if (!hit)
          throw AlphabetError("class range at position " + std::to_string(at) +
                              " covers no symbol of alphabet \"" +
                              alphabet_.symbols() + "\"");
      } else {
        member[static_cast<std::size_t>(lookup(c, at))] = true;
      }
      any_item = true;
    }
    std::vector<Symbol> ids;
    for (std::size_t i = 0; i < member.size(); ++i)
      if (member[i] != negated) ids.push_back(static_cast<Symbol>(i));
    if (ids.empty()) fail(open, "character class matches no symbol");
    return PatternNode::set(std::move(ids), PatternNode::SetForm::Class);
  }

  std::string_view text_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
  std::size_t limit_ = 0;
};

struct Fragment {
  int start;
  int end;
};

class ThompsonBuilder {
 public:
  Nfa build(const PatternNode& root) {
    const Fragment f = emit(root);
    nfa_.initial = f.start;
    nfa_.accepting = {f.end};
    return std::move(nfa_);
  }

 private:
  int new_state() { return nfa_.state_count++; }
  void edge(int from, Symbol s, int to) { nfa_.transitions.push_back({from, s, to}); }

  Fragment epsilon_fragment() {
    const int s = new_state();
    const int e = new_state();
    edge(s, kEpsilon, e);
    return {s, e};
  }

  Fragment concat(Fragment a, Fragment b) {
    edge(a.end, kEpsilon, b.start);
    return {a.start, b.end};
  }

  Fragment optional(Fragment inner) {
    const int s = new_state();
    const int e = new_state();
    edge(s, kEpsilon, inner.start);
    edge(s, kEpsilon, e);
    edge(inner.end, kEpsilon, e);
    return {s, e};
  }

  Fragment emit(const PatternNode& node) {
    using Kind = PatternNode::Kind;
    switch (node.kind) {
      case Kind::Set: {
        const int s = new_state();
        const int e = new_state();
        for (Symbol sym : node.symbols) edge(s, sym, e);
        return {s, e};
      }
      case Kind::Concat: {
        Fragment acc = emit(node.children.front());
        for (std::size_t i = 1; i < node.children.size(); ++i)
          acc = concat(acc, emit(node.children[i]));
        return acc;
      }
      case Kind::Alternate: {
        const int s = new_state();
        const int e = new_state();
        for (const auto& child : node.children) {
          const Fragment f = emit(child);
          edge(s, kEpsilon, f.start);
          edge(f.end, kEpsilon, e);
        }
        return {s, e};
      }
      case Kind::Star: {
        const int s = new_state();
        const int e = new_state();
        const Fragment f = emit(node.children.front());
        edge(s, kEpsilon, f.start);
        edge(s, kEpsilon, e);
        edge(f.end, kEpsilon, f.start);
        edge(f.end, kEpsilon, e);
        return {s, e};
      }
      case Kind::Plus: {
        const Fragment f = emit(node.children.front());
        const int e = new_state();
        edge(f.end, kEpsilon, f.start);
        edge(f.end, kEpsilon, e);
        return {f.start, e};
      }
      case Kind::Optional:
        return optional(emit(node.children.front()));
      case Kind::Repeat: {
        const PatternNode& child = node.children.front();
        if (node.max == 0) return epsilon_fragment();
        Fragment acc{-1, -1};
        auto append = [&](Fragment f) {
          acc = acc.start < 0 ? f : concat(acc, f);
        };
        for (int i = 0; i < node.min; ++i) append(emit(child));
        for (int i = node.min; i < node.max; ++i) append(optional(emit(child)));
        return acc;
      }
    }
    return epsilon_fragment();
  }

  Nfa nfa_;
};

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace

PatternAst parse_pattern(std::string_view text, const Alphabet& alphabet) {
  if (alphabet.empty()) throw AlphabetError("alphabet must not be empty");
  return Parser(text, alphabet).parse();
}

bool Nfa::valid() const {
  if (state_count <= 0 || initial < 0 || initial >= state_count) return false;
  for (const auto& t : transitions)
    if (t.from < 0 || t.from >= state_count || t.to < 0 || t.to >= state_count)
      return false;
  for (int a : accepting)
    if (a < 0 || a >= state_count) return false;
  return std::is_sorted(accepting.begin(), accepting.end()) &&
         std::adjacent_find(accepting.begin(), accepting.end()) == accepting.end();
}

bool Nfa::accepts(const LabelSeq& word) const {
  std::vector<std::vector<const NfaTransition*>> out(static_cast<std::size_t>(state_count));
  for (const auto& t : transitions) out[static_cast<std::size_t>(t.from)].push_back(&t);

  std::vector<char> current(static_cast<std::size_t>(state_count), 0);
  auto close = [&](std::vector<char>& set) {
    std::vector<int> stack;
    for (int s = 0; s < state_count; ++s)
      if (set[static_cast<std::size_t>(s)]) stack.push_back(s);
    while (!stack.empty()) {
      const int s = stack.back();
      stack.pop_back();
      for (const auto* t : out[static_cast<std::size_t>(s)]) {
        if (t->symbol == kEpsilon && !set[static_cast<std::size_t>(t->to)]) {
          set[static_cast<std::size_t>(t->to)] = 1;
          stack.push_back(t->to);
        }
      }
    }
  };
  current[static_cast<std::size_t>(initial)] = 1;
  close(current);
  for (Symbol sym : word) {
    std::vector<char> next(static_cast<std::size_t>(state_count), 0);
    for (int s = 0; s < state_count; ++s) {
      if (!current[static_cast<std::size_t>(s)]) continue;
      for (const auto* t : out[static_cast<std::size_t>(s)])
        if (t->symbol == sym) next[static_cast<std::size_t>(t->to)] = 1;
    }
    close(next);
    current = std::move(next);
  }
  for (int a : accepting)
    if (current[static_cast<std::size_t>(a)]) return true;
  return false;
}

Nfa compile_to_nfa(const PatternAst& ast, const Alphabet& alphabet) {
  (void)alphabet;
  return ThompsonBuilder().build(ast.root);
}

PatternFile parse_pattern_file(std::string_view text) {
  PatternFile file;
  bool have_alphabet = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    const std::string_view line = trim(text.substr(start, stop - start));
    start = stop + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!have_alphabet) {
      constexpr std::string_view kPrefix = "alphabet:";
      if (line.substr(0, kPrefix.size()) != kPrefix)
        throw DataError("pattern file line " + std::to_string(line_no) +
                        ": expected 'alphabet: <symbols>' declaration");
      std::string symbols;
      for (char c : line.substr(kPrefix.size()))
        if (c != ' ' && c != '\t') symbols.push_back(c);
      file.alphabet = Alphabet(symbols);
      have_alphabet = true;
      continue;
    }
    file.patterns.emplace_back(line);
  }
  if (!have_alphabet) throw DataError("pattern file has no alphabet declaration");
  return file;
}

PatternFile load_pattern_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pattern file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pattern_file(buf.str());
}

}  // namespace rpcrf
