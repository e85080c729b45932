#include "cril/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace cril {

namespace {

constexpr std::array<std::string_view, 8> kKeywords = {"begin", "end", "call", "skip",
                                                       "assert", "V", "P", "M"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Xor: return "^";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string_view to_string(UpdateOp op) {
  switch (op) {
    case UpdateOp::Add: return "+=";
    case UpdateOp::Sub: return "-=";
    case UpdateOp::Xor: return "^=";
  }
  return "?";
}

ExprPtr Expr::constant(std::int64_t value) {
  return std::make_shared<const Expr>(Expr{Const{value}});
}
ExprPtr Expr::var(std::string name) {
  return std::make_shared<const Expr>(Expr{Var{std::move(name)}});
}
ExprPtr Expr::heap(std::string index) {
  return std::make_shared<const Expr>(Expr{HeapRef{std::move(index)}});
}
ExprPtr Expr::negate(ExprPtr operand) {
  return std::make_shared<const Expr>(Expr{Not{std::move(operand)}});
}
ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Const>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, Expr::Var>) {
          return lhs.name == rhs.name;
        } else if constexpr (std::is_same_v<T, Expr::HeapRef>) {
          return lhs.index == rhs.index;
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return expr_equal(lhs.operand, rhs.operand);
        } else {
          return lhs.op == rhs.op && expr_equal(lhs.lhs, rhs.lhs) && expr_equal(lhs.rhs, rhs.rhs);
        }
      },
      a.node);
}

bool operator==(const EntryPoint& a, const EntryPoint& b) {
  return a.kind == b.kind && a.first == b.first && a.second == b.second &&
         expr_equal(a.cond, b.cond);
}

bool operator==(const ExitPoint& a, const ExitPoint& b) {
  return a.kind == b.kind && a.first == b.first && a.second == b.second &&
         expr_equal(a.cond, b.cond);
}

bool operator==(const Instruction& a, const Instruction& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          return lhs.target == rhs.target && lhs.op == rhs.op && expr_equal(lhs.value, rhs.value);
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          return lhs.lhs == rhs.lhs && lhs.rhs == rhs.rhs;
        } else if constexpr (std::is_same_v<T, Instruction::V> ||
                             std::is_same_v<T, Instruction::P>) {
          return lhs.var == rhs.var;
        } else if constexpr (std::is_same_v<T, Instruction::Assert>) {
          return expr_equal(lhs.cond, rhs.cond);
        } else {
          return true;
        }
      },
      a.node);
}

bool operator==(const BasicBlock& a, const BasicBlock& b) {
  return a.id == b.id && a.body == b.body;
}

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line),
      detail_(message) {}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, Expr::HeapRef>) {
          out.insert(n.index);
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          collect_vars(*n.operand, out);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          collect_vars(*n.lhs, out);
          collect_vars(*n.rhs, out);
        }
      },
      e.node);
}

bool mentions_heap(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::HeapRef>) {
          return true;
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return mentions_heap(*n.operand);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return mentions_heap(*n.lhs) || mentions_heap(*n.rhs);
        } else {
          return false;
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Lexing and parsing. Every block line is tokenized on its own.

namespace {

enum class Tok { Ident, Int, Op, End };

struct Token {
  Tok kind;
  std::string text;
};

// Longest operators first so that "<->" wins over "<-" and "<".
constexpr std::array<std::string_view, 26> kOperators = {
    "<->", "+=", "-=", "^=", "<-", "->", "==", "!=", "<=", ">=", "&&", "||", "+",
    "-",   "^",  "<",  ">",  "!",  ";",  ",",  "[",  "]",  "(",  ")",  "=",  "&"};

std::vector<Token> tokenize(std::string_view line, int lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      ++i;
      continue;
    }
    if (std::isalpha(uc) || c == '_') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i))});
      i = j;
      continue;
    }
    if (std::isdigit(uc)) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j < line.size() &&
          (std::isalpha(static_cast<unsigned char>(line[j])) || line[j] == '_'))
        throw ParseError(lineno, "malformed number '" + std::string(line.substr(i, j - i + 1)) +
                                     "'");
      out.push_back({Tok::Int, std::string(line.substr(i, j - i))});
      i = j;
      continue;
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (line.substr(i, op.size()) == op) {
        if (op == "=" || op == "&")
          throw ParseError(lineno, "unknown operator '" + std::string(op) + "'");
        out.push_back({Tok::Op, std::string(op)});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(lineno, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, ""});
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view line, int lineno) : toks_(tokenize(line, lineno)), line_(lineno) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Op && peek(ahead).text == op;
  }
  bool at_word(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
  }
  bool at_end() const { return peek().kind == Tok::End; }

  void expect_op(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'" + found());
    ++pos_;
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "'" + found());
    ++pos_;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input" + found());
  }

  std::string name(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail(std::string("expected ") + what + found());
    if (is_keyword(t.text)) fail(std::string("keyword '") + t.text + "' cannot be used as " + what);
    ++pos_;
    return t.text;
  }

  LeftValue left_value() {
    if (at_word("M")) {
      ++pos_;
      expect_op("[");
      std::string index = name("a heap index variable");
      expect_op("]");
      return LeftValue::heap(std::move(index));
    }
    return LeftValue::var(name("a left-value"));
  }

  // || < && < ^ < (== !=) < (< <= > >=) < (+ -) < ! < primary
  ExprPtr expr() { return binary_level(0); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  int line() const { return line_; }

 private:
  std::string found() const {
    const Token& t = peek();
    if (t.kind == Tok::End) return ", found end of line";
    return ", found '" + t.text + "'";
  }

  static const std::vector<std::vector<std::pair<std::string_view, BinaryOp>>>& levels() {
    static const std::vector<std::vector<std::pair<std::string_view, BinaryOp>>> table = {
        {{"||", BinaryOp::Or}},
        {{"&&", BinaryOp::And}},
        {{"^", BinaryOp::Xor}},
        {{"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}},
        {{"<", BinaryOp::Lt}, {"<=", BinaryOp::Le}, {">", BinaryOp::Gt}, {">=", BinaryOp::Ge}},
        {{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}},
    };
    return table;
  }

  ExprPtr binary_level(std::size_t level) {
    if (level == levels().size()) return unary();
    ExprPtr lhs = binary_level(level + 1);
    for (;;) {
      const auto& ops = levels()[level];
      auto it = std::find_if(ops.begin(), ops.end(), [&](const auto& entry) {
        return at_op(entry.first);
      });
      if (it == ops.end()) return lhs;
      ++pos_;
      ExprPtr rhs = binary_level(level + 1);
      lhs = Expr::binary(it->second, std::move(lhs), std::move(rhs));
    }
  }

  ExprPtr unary() {
    if (at_op("!")) {
      ++pos_;
      return Expr::negate(unary());
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
      if (ec != std::errc() ||
          value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
        fail("integer literal out of range: " + t.text);
      ++pos_;
      return Expr::constant(static_cast<std::int64_t>(value));
    }
    if (at_op("(")) {
      ++pos_;
      ExprPtr inner = expr();
      expect_op(")");
      return inner;
    }
    if (at_word("M")) {
      ++pos_;
      expect_op("[");
      std::string index = name("a heap index variable");
      expect_op("]");
      return Expr::heap(std::move(index));
    }
    if (t.kind == Tok::Ident) return Expr::var(name("a variable"));
    if (t.kind == Tok::Op) fail("unknown operator '" + t.text + "' in expression");
    fail("expected an expression" + found());
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

struct SourceLine {
  int number;
  std::string text;
};

std::string strip(std::string_view s) {
  auto hash = s.find('#');
  if (hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return std::string(s);
}

bool looks_like_call(const SourceLine& src) {
  LineParser probe(src.text, src.number);
  return probe.peek().kind == Tok::Ident && probe.at_op("<-", 1) && probe.at_word("call", 2);
}

CallStatement parse_call(const SourceLine& src) {
  LineParser lp(src.text, src.number);
  CallStatement call;
  call.entry = lp.name("a label");
  lp.expect_op("<-");
  lp.expect_word("call");
  call.targets.push_back(lp.name("a process label"));
  while (lp.at_op(",")) {
    lp.expect_op(",");
    call.targets.push_back(lp.name("a process label"));
  }
  lp.expect_op("->");
  call.exit = lp.name("a label");
  lp.expect_end();
  return call;
}

EntryPoint parse_entry(const SourceLine& src) {
  LineParser lp(src.text, src.number);
  if (lp.at_word("begin")) {
    lp.expect_word("begin");
    auto l = lp.name("a label");
    lp.expect_end();
    return EntryPoint::begin(std::move(l));
  }
  auto l1 = lp.name("an entry label");
  if (lp.at_op(";")) {
    lp.expect_op(";");
    auto l2 = lp.name("an entry label");
    lp.expect_op("<-");
    if (lp.at_end()) lp.fail("conditional entry needs a condition after '<-'");
    auto e = lp.expr();
    lp.expect_end();
    return EntryPoint::conditional(std::move(l1), std::move(l2), std::move(e));
  }
  lp.expect_op("<-");
  if (lp.at_word("call")) lp.fail("a call statement must be written on a single line");
  lp.expect_end();
  return EntryPoint::uncond(std::move(l1));
}

ExitPoint parse_exit(const SourceLine& src) {
  LineParser lp(src.text, src.number);
  if (lp.at_word("end") && lp.peek(1).kind == Tok::Ident && lp.peek(2).kind == Tok::End) {
    lp.expect_word("end");
    auto l = lp.name("a label");
    lp.expect_end();
    return ExitPoint::end(std::move(l));
  }
  if (lp.at_op("->")) {
    lp.expect_op("->");
    auto l = lp.name("an exit label");
    lp.expect_end();
    return ExitPoint::uncond(std::move(l));
  }
  auto e = lp.expr();
  lp.expect_op("->");
  auto l1 = lp.name("an exit label");
  lp.expect_op(";");
  auto l2 = lp.name("an exit label");
  lp.expect_end();
  return ExitPoint::conditional(std::move(e), std::move(l1), std::move(l2));
}

Instruction parse_instruction(const SourceLine& src) {
  LineParser lp(src.text, src.number);
  if (lp.at_word("skip")) {
    lp.expect_word("skip");
    lp.expect_end();
    return {Instruction::Skip{}};
  }
  if (lp.at_word("assert")) {
    lp.expect_word("assert");
    auto e = lp.expr();
    lp.expect_end();
    return {Instruction::Assert{std::move(e)}};
  }
  if ((lp.at_word("V") || lp.at_word("P")) && lp.peek(1).kind == Tok::Ident) {
    bool is_v = lp.at_word("V");
    lp.expect_word(is_v ? "V" : "P");
    auto x = lp.name("a semaphore variable");
    lp.expect_end();
    if (is_v) return {Instruction::V{std::move(x)}};
    return {Instruction::P{std::move(x)}};
  }
  LeftValue lhs = lp.left_value();
  if (lp.at_op("<->")) {
    lp.expect_op("<->");
    LeftValue rhs = lp.left_value();
    lp.expect_end();
    if (lhs.name == rhs.name)
      lp.fail("variable '" + lhs.name + "' appears on both sides of '<->'");
    return {Instruction::Exchange{std::move(lhs), std::move(rhs)}};
  }
  UpdateOp op;
  if (lp.at_op("+="))
    op = UpdateOp::Add;
  else if (lp.at_op("-="))
    op = UpdateOp::Sub;
  else if (lp.at_op("^="))
    op = UpdateOp::Xor;
  else
    lp.fail("expected '+=', '-=', '^=' or '<->' after left-value" +
            std::string(lp.at_end() ? ", found end of line" : ", found '" + lp.peek().text + "'"));
  lp.expect_op(to_string(op));
  auto e = lp.expr();
  lp.expect_end();
  if (lhs.is_heap()) {
    if (mentions_heap(*e)) lp.fail("heap reference in the update expression of M[" + lhs.name + "]");
  } else {
    std::set<std::string> used;
    collect_vars(*e, used);
    if (used.count(lhs.name))
      lp.fail("'" + lhs.name + "' must not occur in its own update expression");
  }
  return {Instruction::Update{std::move(lhs), op, std::move(e)}};
}

void collect_block_vars(const BasicBlock& b, std::set<std::string>& out) {
  if (b.is_call()) return;
  const auto& ib = b.instruction_block();
  if (ib.entry.cond) collect_vars(*ib.entry.cond, out);
  if (ib.exit.cond) collect_vars(*ib.exit.cond, out);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          out.insert(n.target.name);
          collect_vars(*n.value, out);
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          out.insert(n.lhs.name);
          out.insert(n.rhs.name);
        } else if constexpr (std::is_same_v<T, Instruction::V> ||
                             std::is_same_v<T, Instruction::P>) {
          out.insert(n.var);
        } else if constexpr (std::is_same_v<T, Instruction::Assert>) {
          collect_vars(*n.cond, out);
        }
      },
      ib.inst.node);
}

}  // namespace

Program parse_program(std::string_view text) {
  std::vector<std::vector<SourceLine>> paragraphs(1);
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++lineno;
    std::string line = strip(raw);
    if (line.empty()) {
      if (!paragraphs.back().empty()) paragraphs.emplace_back();
    } else {
      paragraphs.back().push_back({lineno, std::move(line)});
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (paragraphs.back().empty()) paragraphs.pop_back();
  if (paragraphs.empty()) throw ParseError(lineno == 0 ? 1 : lineno, "program has no blocks");

  Program prog;
  for (const auto& para : paragraphs) {
    BasicBlock b;
    b.id = prog.blocks.size() + 1;
    b.line = para.front().number;
    if (para.size() == 1) {
      if (!looks_like_call(para.front()))
        throw ParseError(para.front().number,
                         "a single-line block must be a call statement 'l <- call l1,... -> l''");
      b.body = parse_call(para.front());
    } else if (para.size() == 3) {
      if (looks_like_call(para.front()))
        throw ParseError(para.front().number,
                         "a call statement must stand alone, separated by blank lines");
      InstructionBlock ib{parse_entry(para[0]), parse_instruction(para[1]), parse_exit(para[2])};
      b.body = std::move(ib);
    } else {
      throw ParseError(para.front().number,
                       "a block is one call line or three lines (entry, instruction, exit); "
                       "found " + std::to_string(para.size()) + " lines");
    }
    collect_block_vars(b, prog.vars);
    prog.blocks.push_back(std::move(b));
  }
  return prog;
}

Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

// ---------------------------------------------------------------------------
// Printing. Parentheses are emitted only where precedence or left
// associativity needs them, so printing then parsing gives the same tree.

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Xor: return 3;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 4;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 5;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 6;
  }
  return 0;
}

constexpr int kUnaryPrecedence = 7;

void print_expr(const Expr& e, int context, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Const>) {
          out += std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, Expr::Var>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, Expr::HeapRef>) {
          out += "M[" + n.index + "]";
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          out += "!";
          print_expr(*n.operand, kUnaryPrecedence, out);
        } else {
          int prec = precedence(n.op);
          bool paren = prec < context;
          if (paren) out += "(";
          print_expr(*n.lhs, prec, out);
          out += " ";
          out += to_string(n.op);
          out += " ";
          print_expr(*n.rhs, prec + 1, out);
          if (paren) out += ")";
        }
      },
      e.node);
}

std::string render_left(const LeftValue& lv) {
  return lv.is_heap() ? "M[" + lv.name + "]" : lv.name;
}

}  // namespace

std::string render_expr(const Expr& e) {
  std::string out;
  print_expr(e, 0, out);
  return out;
}

std::string render_block(const BasicBlock& b) {
  if (b.is_call()) {
    const auto& c = b.call();
    std::string out = c.entry + " <- call ";
    for (std::size_t i = 0; i < c.targets.size(); ++i) {
      if (i) out += ",";
      out += c.targets[i];
    }
    return out + " -> " + c.exit + "\n";
  }
  const auto& ib = b.instruction_block();
  std::string out;
  switch (ib.entry.kind) {
    case EntryPoint::Kind::Begin: out += "begin " + ib.entry.first; break;
    case EntryPoint::Kind::Uncond: out += ib.entry.first + " <-"; break;
    case EntryPoint::Kind::Cond:
      out += ib.entry.first + ";" + ib.entry.second + " <- " + render_expr(*ib.entry.cond);
      break;
  }
  out += "\n";
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Instruction::Update>) {
          out += render_left(n.target) + " " + std::string(to_string(n.op)) + " " +
                 render_expr(*n.value);
        } else if constexpr (std::is_same_v<T, Instruction::Exchange>) {
          out += render_left(n.lhs) + " <-> " + render_left(n.rhs);
        } else if constexpr (std::is_same_v<T, Instruction::V>) {
          out += "V " + n.var;
        } else if constexpr (std::is_same_v<T, Instruction::P>) {
          out += "P " + n.var;
        } else if constexpr (std::is_same_v<T, Instruction::Assert>) {
          out += "assert " + render_expr(*n.cond);
        } else {
          out += "skip";
        }
      },
      ib.inst.node);
  out += "\n";
  switch (ib.exit.kind) {
    case ExitPoint::Kind::End: out += "end " + ib.exit.first; break;
    case ExitPoint::Kind::Uncond: out += "-> " + ib.exit.first; break;
    case ExitPoint::Kind::Cond:
      out += render_expr(*ib.exit.cond) + " -> " + ib.exit.first + ";" + ib.exit.second;
      break;
  }
  return out + "\n";
}

std::string render_program(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    if (i) out += "\n";
    out += render_block(p.blocks[i]);
  }
  return out;
}

}  // namespace cril
