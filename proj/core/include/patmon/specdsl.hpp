// Specification language: free-form layout, `//` comments, an optional
// leading shebang line, and the blocks
//
//   var { name: string; ... }
//   signature label { field: string; ... }
//   expr name { ... }
//   <top-level expression>
//
// Expressions combine event atoms `label(binders | guard)`, sequencing
// with `;`, `one_of {..} or {..}`, `zero_or_more {..}`, and
// `within (<cmp> <seconds>) {..}`.

#pragma once

#include "patmon/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace patmon {

struct SourcePos {
  int line = 0;
  int col = 0;
};

// Formats as `<file>:<line>:<col>: <message>`.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string &file, SourcePos pos,
              const std::string &message);
  SourcePos pos() const { return pos_; }

private:
  SourcePos pos_;
};

struct VarDecl {
  std::string name;
  DataValue::Kind type = DataValue::Kind::text;
  SourcePos pos;
};

struct FieldDecl {
  std::string name;
  DataValue::Kind type = DataValue::Kind::text;
};

struct SignatureDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  SourcePos pos;
};

// Guard operand after name resolution. Binders index the enclosing atom's
// fields; globals index the declared variables.
struct GuardOperand {
  enum class Kind { binder, global, literal };
  Kind kind = Kind::literal;
  int index = -1;
  std::string text; // name as written, or the literal value
};

struct Guard;

struct GuardAtom {
  GuardOperand lhs;
  GuardOperand rhs;
  bool equal = true;
  SourcePos pos;
};

struct Guard {
  enum class Kind { atom, all_of, any_of };
  Kind kind = Kind::atom;
  std::optional<GuardAtom> atom;
  std::vector<Guard> children; // for all_of / any_of
};

enum class CmpOp { lt, le, gt, ge, eq };

std::string_view cmp_text(CmpOp op);
bool cmp_eval(std::int64_t lhs, CmpOp op, std::int64_t rhs);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct EventAtomExpr {
  std::string signature;
  int sig_index = -1;
  std::vector<std::string> binders;
  std::optional<Guard> guard;
};

struct SeqExpr {
  std::vector<ExprPtr> items; // >= 2
};

struct OneOfExpr {
  std::vector<ExprPtr> branches; // >= 2
};

struct ZeroOrMoreExpr {
  ExprPtr child;
};

struct WithinExpr {
  CmpOp cmp = CmpOp::gt;
  std::int64_t bound = 0;
  ExprPtr child;
};

struct RefExpr {
  std::string name;
  int expr_index = -1;
};

struct ExprNode {
  std::variant<EventAtomExpr, SeqExpr, OneOfExpr, ZeroOrMoreExpr, WithinExpr,
               RefExpr>
      node;
  SourcePos pos;
};

struct NamedExpr {
  std::string name;
  ExprPtr body;
  SourcePos pos;
};

struct SpecAst {
  std::vector<VarDecl> vars;
  std::vector<SignatureDecl> signatures;
  std::vector<NamedExpr> exprs;
  ExprPtr main;

  int var_index(std::string_view name) const;
  int signature_index(std::string_view name) const;
  int expr_index(std::string_view name) const;
};

// Parses and validates. Throws parse_error on lexical or syntax errors,
// duplicate names, unresolved references, arity mismatches, and cyclic
// expression references.
SpecAst parse_spec(std::string_view source,
                   const std::string &filename = "<spec>");

// Inlines every Ref node of the main expression; purely structural, and
// total because parse_spec established acyclicity.
ExprPtr resolve(const SpecAst &ast);

// Replaces every `within` bound; used by the --bound override.
ExprPtr override_bounds(const ExprPtr &expr, std::int64_t bound);

std::string pretty_print(const SpecAst &ast);
std::string pretty_print(const ExprPtr &expr);
std::string guard_to_string(const Guard &g);

// Structural equality, ignoring source positions.
bool ast_equal(const SpecAst &a, const SpecAst &b);
bool expr_equal(const ExprPtr &a, const ExprPtr &b);

} // namespace patmon
