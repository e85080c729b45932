#pragma once

// Abstract syntax, parser and printer for CRIL programs.
//
// Text format: an instruction block is three consecutive non-blank lines
// (entry, instruction, exit); a call statement is a single line. Blocks are
// separated by blank lines and `#` starts a comment.
//
//   begin main          l1 <- call sub0,sub1 -> l2      l1;l2 <- x == 0
//   skip                                                y += x
//   -> l1                                               x > 0 -> l3;l4

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cril {

using Label = std::string;

bool is_identifier(std::string_view text);

enum class BinaryOp { Add, Sub, Xor, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view to_string(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Const {
    std::int64_t value;
  };
  struct Var {
    std::string name;
  };
  /// M[index]; the index is always a plain variable.
  struct HeapRef {
    std::string index;
  };
  struct Not {
    ExprPtr operand;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };

  std::variant<Const, Var, HeapRef, Not, Binary> node;

  static ExprPtr constant(std::int64_t value);
  static ExprPtr var(std::string name);
  static ExprPtr heap(std::string index);
  static ExprPtr negate(ExprPtr operand);
  static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
};

bool operator==(const Expr& a, const Expr& b);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

struct LeftValue {
  enum class Kind { Var, Heap };
  Kind kind = Kind::Var;
  /// Variable name, or the index variable of M[...].
  std::string name;

  static LeftValue var(std::string name) { return {Kind::Var, std::move(name)}; }
  static LeftValue heap(std::string index) { return {Kind::Heap, std::move(index)}; }
  bool is_heap() const { return kind == Kind::Heap; }
  friend bool operator==(const LeftValue&, const LeftValue&) = default;
};

struct EntryPoint {
  enum class Kind { Uncond, Cond, Begin };
  Kind kind = Kind::Uncond;
  Label first;   // l, l1, or the begin label
  Label second;  // l2 for Cond
  ExprPtr cond;  // Cond only

  static EntryPoint uncond(Label l) { return {Kind::Uncond, std::move(l), {}, nullptr}; }
  static EntryPoint begin(Label l) { return {Kind::Begin, std::move(l), {}, nullptr}; }
  static EntryPoint conditional(Label l1, Label l2, ExprPtr e) {
    return {Kind::Cond, std::move(l1), std::move(l2), std::move(e)};
  }
};

struct ExitPoint {
  enum class Kind { Uncond, Cond, End };
  Kind kind = Kind::Uncond;
  Label first;
  Label second;
  ExprPtr cond;

  static ExitPoint uncond(Label l) { return {Kind::Uncond, std::move(l), {}, nullptr}; }
  static ExitPoint end(Label l) { return {Kind::End, std::move(l), {}, nullptr}; }
  static ExitPoint conditional(ExprPtr e, Label l1, Label l2) {
    return {Kind::Cond, std::move(l1), std::move(l2), std::move(e)};
  }
};

bool operator==(const EntryPoint& a, const EntryPoint& b);
bool operator==(const ExitPoint& a, const ExitPoint& b);

enum class UpdateOp { Add, Sub, Xor };

std::string_view to_string(UpdateOp op);

struct Instruction {
  struct Update {
    LeftValue target;
    UpdateOp op;
    ExprPtr value;
  };
  struct Exchange {
    LeftValue lhs;
    LeftValue rhs;
  };
  struct V {
    std::string var;
  };
  struct P {
    std::string var;
  };
  struct Assert {
    ExprPtr cond;
  };
  struct Skip {};

  std::variant<Update, Exchange, V, P, Assert, Skip> node;
};

bool operator==(const Instruction& a, const Instruction& b);

struct InstructionBlock {
  EntryPoint entry;
  Instruction inst;
  ExitPoint exit;
  friend bool operator==(const InstructionBlock&, const InstructionBlock&) = default;
};

/// `entry <- call targets... -> exit`
struct CallStatement {
  Label entry;
  std::vector<Label> targets;
  Label exit;
  friend bool operator==(const CallStatement&, const CallStatement&) = default;
};

using BlockId = std::size_t;

struct BasicBlock {
  /// 1-based ordinal in the source file.
  BlockId id = 0;
  /// First source line of the block; diagnostics only, ignored by equality.
  int line = 0;
  std::variant<InstructionBlock, CallStatement> body;

  bool is_call() const { return std::holds_alternative<CallStatement>(body); }
  const InstructionBlock& instruction_block() const { return std::get<InstructionBlock>(body); }
  const CallStatement& call() const { return std::get<CallStatement>(body); }
};

bool operator==(const BasicBlock& a, const BasicBlock& b);

struct Program {
  std::vector<BasicBlock> blocks;
  /// Every variable name occurring anywhere in the program.
  std::set<std::string> vars;

  const BasicBlock& block(BlockId id) const { return blocks.at(id - 1); }
  friend bool operator==(const Program&, const Program&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string detail_;
};

Program parse_program(std::string_view text);
Program load_program(const std::string& path);

std::string render_expr(const Expr& e);
std::string render_block(const BasicBlock& b);
std::string render_program(const Program& p);

/// Variables referenced by an expression (heap indices included, M excluded).
void collect_vars(const Expr& e, std::set<std::string>& out);
bool mentions_heap(const Expr& e);

}  // namespace cril
