#include "patmon/specdsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace patmon {

parse_error::parse_error(const std::string &file, SourcePos pos,
                         const std::string &message)
    : std::runtime_error(file + ":" + std::to_string(pos.line) + ":" +
                         std::to_string(pos.col) + ": " + message),
      pos_(pos) {}

std::string_view cmp_text(CmpOp op) {
  switch (op) {
  case CmpOp::lt:
    return "<";
  case CmpOp::le:
    return "<=";
  case CmpOp::gt:
    return ">";
  case CmpOp::ge:
    return ">=";
  case CmpOp::eq:
    return "==";
  }
  return "?";
}

bool cmp_eval(std::int64_t lhs, CmpOp op, std::int64_t rhs) {
  switch (op) {
  case CmpOp::lt:
    return lhs < rhs;
  case CmpOp::le:
    return lhs <= rhs;
  case CmpOp::gt:
    return lhs > rhs;
  case CmpOp::ge:
    return lhs >= rhs;
  case CmpOp::eq:
    return lhs == rhs;
  }
  return false;
}

int SpecAst::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name)
      return static_cast<int>(i);
  return -1;
}

int SpecAst::signature_index(std::string_view name) const {
  for (std::size_t i = 0; i < signatures.size(); ++i)
    if (signatures[i].name == name)
      return static_cast<int>(i);
  return -1;
}

int SpecAst::expr_index(std::string_view name) const {
  for (std::size_t i = 0; i < exprs.size(); ++i)
    if (exprs[i].name == name)
      return static_cast<int>(i);
  return -1;
}

namespace {

enum class Tok {
  ident,
  integer,
  string_lit,
  lbrace,
  rbrace,
  lparen,
  rparen,
  semi,
  colon,
  comma,
  pipe,
  eq_eq,
  bang_eq,
  and_and,
  or_or,
  lt,
  le,
  gt,
  ge,
  eof,
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  std::int64_t value = 0;
  SourcePos pos;
};

class Lexer {
public:
  Lexer(std::string_view src, const std::string &file)
      : src_(src), file_(file) {
    // A leading shebang line is interpreter metadata, not input.
    if (src_.substr(0, 2) == "#!") {
      while (i_ < src_.size() && src_[i_] != '\n')
        advance();
    }
  }

  std::vector<Token> lex() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next_token();
      bool done = t.kind == Tok::eof;
      out.push_back(std::move(t));
      if (done)
        return out;
    }
  }

private:
  [[noreturn]] void fail(SourcePos pos, const std::string &msg) const {
    throw parse_error(file_, pos, msg);
  }

  SourcePos here() const { return {line_, col_}; }

  char peek(std::size_t off = 0) const {
    return i_ + off < src_.size() ? src_[i_ + off] : '\0';
  }

  void advance() {
    if (i_ >= src_.size())
      return;
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_trivia() {
    for (;;) {
      while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(peek())))
        advance();
      if (peek() == '/' && peek(1) == '/') {
        while (i_ < src_.size() && peek() != '\n')
          advance();
        continue;
      }
      return;
    }
  }

  Token next_token() {
    SourcePos pos = here();
    if (i_ >= src_.size())
      return {Tok::eof, "", 0, pos};

    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string text;
      while (std::isalnum(static_cast<unsigned char>(peek())) ||
             peek() == '_') {
        text += peek();
        advance();
      }
      return {Tok::ident, std::move(text), 0, pos};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        text += peek();
        advance();
      }
      if (text.size() > 18)
        fail(pos, "number too large");
      return {Tok::integer, text, std::stoll(text), pos};
    }
    if (c == '"') {
      advance();
      std::string text;
      for (;;) {
        char d = peek();
        if (d == '\0' || d == '\n')
          fail(pos, "unterminated string literal");
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\' && (peek(1) == '"' || peek(1) == '\\')) {
          advance();
          text += peek();
          advance();
          continue;
        }
        text += d;
        advance();
      }
      return {Tok::string_lit, std::move(text), 0, pos};
    }

    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two('=', '=')) {
      advance();
      advance();
      return {Tok::eq_eq, "==", 0, pos};
    }
    if (two('!', '=')) {
      advance();
      advance();
      return {Tok::bang_eq, "!=", 0, pos};
    }
    if (two('&', '&')) {
      advance();
      advance();
      return {Tok::and_and, "&&", 0, pos};
    }
    if (two('|', '|')) {
      advance();
      advance();
      return {Tok::or_or, "||", 0, pos};
    }
    if (two('<', '=')) {
      advance();
      advance();
      return {Tok::le, "<=", 0, pos};
    }
    if (two('>', '=')) {
      advance();
      advance();
      return {Tok::ge, ">=", 0, pos};
    }

    switch (c) {
    case '{':
      advance();
      return {Tok::lbrace, "{", 0, pos};
    case '}':
      advance();
      return {Tok::rbrace, "}", 0, pos};
    case '(':
      advance();
      return {Tok::lparen, "(", 0, pos};
    case ')':
      advance();
      return {Tok::rparen, ")", 0, pos};
    case ';':
      advance();
      return {Tok::semi, ";", 0, pos};
    case ':':
      advance();
      return {Tok::colon, ":", 0, pos};
    case ',':
      advance();
      return {Tok::comma, ",", 0, pos};
    case '|':
      advance();
      return {Tok::pipe, "|", 0, pos};
    case '<':
      advance();
      return {Tok::lt, "<", 0, pos};
    case '>':
      advance();
      return {Tok::gt, ">", 0, pos};
    default:
      fail(pos, std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view src_;
  std::string file_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_keyword(const Token &t, std::string_view kw) {
  return t.kind == Tok::ident && t.text == kw;
}

class Parser {
public:
  Parser(std::vector<Token> tokens, const std::string &file)
      : toks_(std::move(tokens)), file_(file) {}

  SpecAst parse() {
    SpecAst ast;
    for (;;) {
      if (is_keyword(peek(), "var")) {
        parse_var_block(ast);
      } else if (is_keyword(peek(), "signature")) {
        parse_signature_block(ast);
      } else if (is_keyword(peek(), "expr")) {
        parse_expr_block(ast);
      } else {
        break;
      }
    }
    if (peek().kind == Tok::eof)
      fail(peek().pos, "expected a top-level expression");
    ast.main = parse_top_expr();
    expect(Tok::eof, "expected end of input after the top-level expression");
    validate(ast);
    return ast;
  }

private:
  [[noreturn]] void fail(SourcePos pos, const std::string &msg) const {
    throw parse_error(file_, pos, msg);
  }

  const Token &peek(std::size_t off = 0) const {
    std::size_t i = std::min(pos_ + off, toks_.size() - 1);
    return toks_[i];
  }

  Token take() {
    Token t = peek();
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }

  Token expect(Tok kind, const std::string &what) {
    if (peek().kind != kind)
      fail(peek().pos, what);
    return take();
  }

  std::string expect_ident(const std::string &what) {
    if (peek().kind != Tok::ident)
      fail(peek().pos, what);
    return take().text;
  }

  DataValue::Kind parse_type() {
    const Token &t = peek();
    if (is_keyword(t, "string")) {
      take();
      return DataValue::Kind::text;
    }
    if (is_keyword(t, "number")) {
      take();
      return DataValue::Kind::number;
    }
    fail(t.pos, "expected a type, 'string' or 'number'");
  }

  void parse_var_block(SpecAst &ast) {
    take(); // var
    expect(Tok::lbrace, "expected '{' after 'var'");
    while (peek().kind != Tok::rbrace) {
      SourcePos pos = peek().pos;
      std::string name = expect_ident("expected a variable name");
      expect(Tok::colon, "expected ':' after variable name");
      DataValue::Kind type = parse_type();
      expect(Tok::semi, "expected ';' after variable declaration");
      ast.vars.push_back({std::move(name), type, pos});
    }
    take(); // }
  }

  void parse_signature_block(SpecAst &ast) {
    take(); // signature
    SourcePos pos = peek().pos;
    std::string name = expect_ident("expected a signature name");
    expect(Tok::lbrace, "expected '{' after signature name");
    SignatureDecl sig{std::move(name), {}, pos};
    while (peek().kind != Tok::rbrace) {
      std::string field = expect_ident("expected a field name");
      expect(Tok::colon, "expected ':' after field name");
      DataValue::Kind type = parse_type();
      expect(Tok::semi, "expected ';' after field declaration");
      sig.fields.push_back({std::move(field), type});
    }
    take(); // }
    ast.signatures.push_back(std::move(sig));
  }

  void parse_expr_block(SpecAst &ast) {
    take(); // expr
    SourcePos pos = peek().pos;
    std::string name = expect_ident("expected an expression name");
    expect(Tok::lbrace, "expected '{' after expression name");
    ExprPtr body = parse_top_expr();
    expect(Tok::rbrace, "expected '}' to close expression definition");
    ast.exprs.push_back({std::move(name), std::move(body), pos});
  }

  ExprPtr make(ExprNode node) {
    auto p = std::make_shared<ExprNode>(std::move(node));
    created_.push_back(p.get());
    return p;
  }

  ExprPtr parse_top_expr() {
    SourcePos pos = peek().pos;
    std::vector<ExprPtr> items;
    items.push_back(parse_term());
    while (peek().kind == Tok::semi) {
      take();
      items.push_back(parse_term());
    }
    if (items.size() == 1)
      return items[0];
    return make({SeqExpr{std::move(items)}, pos});
  }

  ExprPtr parse_block() {
    expect(Tok::lbrace, "expected '{'");
    ExprPtr e = parse_top_expr();
    expect(Tok::rbrace, "expected '}'");
    return e;
  }

  ExprPtr parse_term() {
    const Token &t = peek();
    if (is_keyword(t, "one_of")) {
      SourcePos pos = take().pos;
      std::vector<ExprPtr> branches;
      branches.push_back(parse_block());
      if (!is_keyword(peek(), "or"))
        fail(peek().pos, "one_of requires at least two 'or' branches");
      while (is_keyword(peek(), "or")) {
        take();
        branches.push_back(parse_block());
      }
      return make({OneOfExpr{std::move(branches)}, pos});
    }
    if (is_keyword(t, "zero_or_more")) {
      SourcePos pos = take().pos;
      return make({ZeroOrMoreExpr{parse_block()}, pos});
    }
    if (is_keyword(t, "within")) {
      SourcePos pos = take().pos;
      expect(Tok::lparen, "expected '(' after 'within'");
      CmpOp op = parse_cmp();
      Token bound = expect(Tok::integer, "expected an integer bound");
      expect(Tok::rparen, "expected ')' after the bound");
      return make({WithinExpr{op, bound.value, parse_block()}, pos});
    }
    if (t.kind == Tok::ident) {
      Token name = take();
      if (peek().kind != Tok::lparen)
        return make({RefExpr{name.text, -1}, name.pos});
      take(); // (
      EventAtomExpr atom;
      atom.signature = name.text;
      if (peek().kind != Tok::rparen && peek().kind != Tok::pipe) {
        atom.binders.push_back(expect_ident("expected a binder name"));
        while (peek().kind == Tok::comma) {
          take();
          atom.binders.push_back(expect_ident("expected a binder name"));
        }
      }
      if (peek().kind == Tok::pipe) {
        take();
        atom.guard = parse_guard_or();
      }
      expect(Tok::rparen, "expected ')' to close the event atom");
      return make({std::move(atom), name.pos});
    }
    fail(t.pos, "expected an expression");
  }

  CmpOp parse_cmp() {
    switch (peek().kind) {
    case Tok::lt:
      take();
      return CmpOp::lt;
    case Tok::le:
      take();
      return CmpOp::le;
    case Tok::gt:
      take();
      return CmpOp::gt;
    case Tok::ge:
      take();
      return CmpOp::ge;
    case Tok::eq_eq:
      take();
      return CmpOp::eq;
    default:
      fail(peek().pos, "expected a comparator: <, <=, >, >= or ==");
    }
  }

  Guard parse_guard_or() {
    std::vector<Guard> children;
    children.push_back(parse_guard_and());
    while (peek().kind == Tok::or_or) {
      take();
      children.push_back(parse_guard_and());
    }
    if (children.size() == 1)
      return std::move(children[0]);
    Guard g;
    g.kind = Guard::Kind::any_of;
    for (auto &c : children) {
      if (c.kind == Guard::Kind::any_of) {
        for (auto &cc : c.children)
          g.children.push_back(std::move(cc));
      } else {
        g.children.push_back(std::move(c));
      }
    }
    return g;
  }

  Guard parse_guard_and() {
    std::vector<Guard> children;
    children.push_back(parse_guard_primary());
    while (peek().kind == Tok::and_and) {
      take();
      children.push_back(parse_guard_primary());
    }
    if (children.size() == 1)
      return std::move(children[0]);
    Guard g;
    g.kind = Guard::Kind::all_of;
    for (auto &c : children) {
      if (c.kind == Guard::Kind::all_of) {
        for (auto &cc : c.children)
          g.children.push_back(std::move(cc));
      } else {
        g.children.push_back(std::move(c));
      }
    }
    return g;
  }

  Guard parse_guard_primary() {
    if (peek().kind == Tok::lparen) {
      take();
      Guard g = parse_guard_or();
      expect(Tok::rparen, "expected ')' in guard");
      return g;
    }
    GuardAtom atom;
    atom.pos = peek().pos;
    atom.lhs = parse_guard_operand();
    if (peek().kind == Tok::eq_eq) {
      atom.equal = true;
    } else if (peek().kind == Tok::bang_eq) {
      atom.equal = false;
    } else {
      fail(peek().pos, "expected '==' or '!=' in guard");
    }
    take();
    atom.rhs = parse_guard_operand();
    Guard g;
    g.kind = Guard::Kind::atom;
    g.atom = std::move(atom);
    return g;
  }

  GuardOperand parse_guard_operand() {
    const Token &t = peek();
    if (t.kind == Tok::ident) {
      GuardOperand op;
      op.kind = GuardOperand::Kind::binder; // resolved later
      op.text = take().text;
      return op;
    }
    if (t.kind == Tok::string_lit) {
      GuardOperand op;
      op.kind = GuardOperand::Kind::literal;
      op.text = take().text;
      return op;
    }
    fail(t.pos, "expected a name or string literal in guard");
  }

  // ---- validation & resolution -------------------------------------

  void validate(SpecAst &ast) {
    check_unique(ast);
    for (ExprNode *node : created_)
      resolve_node(ast, *node);
    check_acyclic(ast);
  }

  void check_unique(const SpecAst &ast) {
    std::set<std::string> seen;
    for (const auto &v : ast.vars) {
      if (!seen.insert(v.name).second)
        fail(v.pos, "duplicate variable name '" + v.name + "'");
    }
    seen.clear();
    for (const auto &s : ast.signatures) {
      if (!seen.insert(s.name).second)
        fail(s.pos, "duplicate signature name '" + s.name + "'");
    }
    seen.clear();
    for (const auto &e : ast.exprs) {
      if (!seen.insert(e.name).second)
        fail(e.pos, "duplicate expression name '" + e.name + "'");
    }
  }

  void resolve_node(SpecAst &ast, ExprNode &node) {
    if (auto *atom = std::get_if<EventAtomExpr>(&node.node)) {
      int sig = ast.signature_index(atom->signature);
      if (sig < 0)
        fail(node.pos, "unknown signature '" + atom->signature + "'");
      atom->sig_index = sig;
      const auto &fields = ast.signatures[sig].fields;
      if (atom->binders.size() != fields.size())
        fail(node.pos, "signature '" + atom->signature + "' expects " +
                           std::to_string(fields.size()) + " binders, got " +
                           std::to_string(atom->binders.size()));
      std::set<std::string> names;
      for (const auto &b : atom->binders) {
        if (!names.insert(b).second)
          fail(node.pos, "duplicate binder '" + b + "'");
        if (ast.var_index(b) >= 0)
          fail(node.pos, "binder '" + b + "' shadows a declared variable");
      }
      if (atom->guard)
        resolve_guard(ast, *atom, *atom->guard);
    } else if (auto *ref = std::get_if<RefExpr>(&node.node)) {
      int idx = ast.expr_index(ref->name);
      if (idx < 0)
        fail(node.pos, "unknown expression '" + ref->name + "'");
      ref->expr_index = idx;
    }
  }

  void resolve_guard(const SpecAst &ast, const EventAtomExpr &atom,
                     Guard &g) {
    if (g.kind == Guard::Kind::atom) {
      resolve_operand(ast, atom, g.atom->lhs, g.atom->pos);
      resolve_operand(ast, atom, g.atom->rhs, g.atom->pos);
      if (g.atom->lhs.kind == GuardOperand::Kind::literal &&
          g.atom->rhs.kind == GuardOperand::Kind::literal)
        fail(g.atom->pos,
             "at least one side of a guard atom must be a binder or variable");
      return;
    }
    for (auto &c : g.children)
      resolve_guard(ast, atom, c);
  }

  void resolve_operand(const SpecAst &ast, const EventAtomExpr &atom,
                       GuardOperand &op, SourcePos pos) {
    if (op.kind == GuardOperand::Kind::literal)
      return;
    for (std::size_t i = 0; i < atom.binders.size(); ++i) {
      if (atom.binders[i] == op.text) {
        op.kind = GuardOperand::Kind::binder;
        op.index = static_cast<int>(i);
        return;
      }
    }
    int g = ast.var_index(op.text);
    if (g >= 0) {
      op.kind = GuardOperand::Kind::global;
      op.index = g;
      return;
    }
    fail(pos, "'" + op.text + "' is neither a binder of this atom nor a "
                              "declared variable");
  }

  void check_acyclic(const SpecAst &ast) {
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> state(ast.exprs.size(), 0);
    for (std::size_t i = 0; i < ast.exprs.size(); ++i)
      visit(ast, i, state);
  }

  void visit(const SpecAst &ast, std::size_t idx, std::vector<int> &state) {
    if (state[idx] == 2)
      return;
    if (state[idx] == 1)
      fail(ast.exprs[idx].pos,
           "expression '" + ast.exprs[idx].name + "' references itself");
    state[idx] = 1;
    walk_refs(ast, ast.exprs[idx].body, state);
    state[idx] = 2;
  }

  void walk_refs(const SpecAst &ast, const ExprPtr &e,
                 std::vector<int> &state) {
    if (const auto *ref = std::get_if<RefExpr>(&e->node)) {
      visit(ast, static_cast<std::size_t>(ref->expr_index), state);
    } else if (const auto *seq = std::get_if<SeqExpr>(&e->node)) {
      for (const auto &i : seq->items)
        walk_refs(ast, i, state);
    } else if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
      for (const auto &b : alt->branches)
        walk_refs(ast, b, state);
    } else if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
      walk_refs(ast, star->child, state);
    } else if (const auto *win = std::get_if<WithinExpr>(&e->node)) {
      walk_refs(ast, win->child, state);
    }
  }

  std::vector<Token> toks_;
  std::string file_;
  std::size_t pos_ = 0;
  std::vector<ExprNode *> created_;
};

} // namespace

SpecAst parse_spec(std::string_view source, const std::string &filename) {
  Lexer lexer(source, filename);
  Parser parser(lexer.lex(), filename);
  return parser.parse();
}

namespace {

ExprPtr inline_refs(const SpecAst &ast, const ExprPtr &e) {
  if (const auto *ref = std::get_if<RefExpr>(&e->node))
    return inline_refs(ast, ast.exprs[ref->expr_index].body);
  if (const auto *seq = std::get_if<SeqExpr>(&e->node)) {
    SeqExpr out;
    for (const auto &i : seq->items)
      out.items.push_back(inline_refs(ast, i));
    return std::make_shared<ExprNode>(ExprNode{std::move(out), e->pos});
  }
  if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
    OneOfExpr out;
    for (const auto &b : alt->branches)
      out.branches.push_back(inline_refs(ast, b));
    return std::make_shared<ExprNode>(ExprNode{std::move(out), e->pos});
  }
  if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
    return std::make_shared<ExprNode>(
        ExprNode{ZeroOrMoreExpr{inline_refs(ast, star->child)}, e->pos});
  }
  if (const auto *win = std::get_if<WithinExpr>(&e->node)) {
    return std::make_shared<ExprNode>(ExprNode{
        WithinExpr{win->cmp, win->bound, inline_refs(ast, win->child)},
        e->pos});
  }
  return e; // event atoms are immutable and shareable
}

} // namespace

ExprPtr resolve(const SpecAst &ast) { return inline_refs(ast, ast.main); }

ExprPtr override_bounds(const ExprPtr &expr, std::int64_t bound) {
  if (const auto *seq = std::get_if<SeqExpr>(&expr->node)) {
    SeqExpr out;
    for (const auto &i : seq->items)
      out.items.push_back(override_bounds(i, bound));
    return std::make_shared<ExprNode>(ExprNode{std::move(out), expr->pos});
  }
  if (const auto *alt = std::get_if<OneOfExpr>(&expr->node)) {
    OneOfExpr out;
    for (const auto &b : alt->branches)
      out.branches.push_back(override_bounds(b, bound));
    return std::make_shared<ExprNode>(ExprNode{std::move(out), expr->pos});
  }
  if (const auto *star = std::get_if<ZeroOrMoreExpr>(&expr->node)) {
    return std::make_shared<ExprNode>(
        ExprNode{ZeroOrMoreExpr{override_bounds(star->child, bound)},
                 expr->pos});
  }
  if (const auto *win = std::get_if<WithinExpr>(&expr->node)) {
    return std::make_shared<ExprNode>(ExprNode{
        WithinExpr{win->cmp, bound, override_bounds(win->child, bound)},
        expr->pos});
  }
  return expr;
}

namespace {

std::string type_text(DataValue::Kind k) {
  return k == DataValue::Kind::text ? "string" : "number";
}

void print_operand(std::ostream &os, const GuardOperand &op) {
  if (op.kind == GuardOperand::Kind::literal)
    os << '"' << op.text << '"';
  else
    os << op.text;
}

void print_guard(std::ostream &os, const Guard &g, bool parenthesize) {
  switch (g.kind) {
  case Guard::Kind::atom:
    print_operand(os, g.atom->lhs);
    os << (g.atom->equal ? " == " : " != ");
    print_operand(os, g.atom->rhs);
    return;
  case Guard::Kind::all_of:
    if (parenthesize)
      os << '(';
    for (std::size_t i = 0; i < g.children.size(); ++i) {
      if (i)
        os << " && ";
      print_guard(os, g.children[i], true);
    }
    if (parenthesize)
      os << ')';
    return;
  case Guard::Kind::any_of:
    if (parenthesize)
      os << '(';
    for (std::size_t i = 0; i < g.children.size(); ++i) {
      if (i)
        os << " || ";
      // && binds tighter than ||, so conjunction children stay bare
      print_guard(os, g.children[i], g.children[i].kind == Guard::Kind::any_of);
    }
    if (parenthesize)
      os << ')';
    return;
  }
}

void indent(std::ostream &os, int depth) {
  for (int i = 0; i < depth; ++i)
    os << "    ";
}

void print_expr(std::ostream &os, const ExprPtr &e, int depth);

void print_block(std::ostream &os, const ExprPtr &e, int depth) {
  os << "{\n";
  print_expr(os, e, depth + 1);
  os << '\n';
  indent(os, depth);
  os << '}';
}

void print_expr(std::ostream &os, const ExprPtr &e, int depth) {
  if (const auto *atom = std::get_if<EventAtomExpr>(&e->node)) {
    indent(os, depth);
    os << atom->signature << '(';
    for (std::size_t i = 0; i < atom->binders.size(); ++i) {
      if (i)
        os << ", ";
      os << atom->binders[i];
    }
    if (atom->guard) {
      os << " | ";
      print_guard(os, *atom->guard, false);
    }
    os << ')';
    return;
  }
  if (const auto *ref = std::get_if<RefExpr>(&e->node)) {
    indent(os, depth);
    os << ref->name;
    return;
  }
  if (const auto *seq = std::get_if<SeqExpr>(&e->node)) {
    for (std::size_t i = 0; i < seq->items.size(); ++i) {
      if (i)
        os << ";\n";
      print_expr(os, seq->items[i], depth);
    }
    return;
  }
  if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
    indent(os, depth);
    os << "one_of ";
    for (std::size_t i = 0; i < alt->branches.size(); ++i) {
      if (i)
        os << " or ";
      print_block(os, alt->branches[i], depth);
    }
    return;
  }
  if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
    indent(os, depth);
    os << "zero_or_more ";
    print_block(os, star->child, depth);
    return;
  }
  const auto &win = std::get<WithinExpr>(e->node);
  indent(os, depth);
  os << "within (" << cmp_text(win.cmp) << win.bound << ") ";
  print_block(os, win.child, depth);
}

} // namespace

std::string pretty_print(const ExprPtr &expr) {
  std::ostringstream os;
  print_expr(os, expr, 0);
  return os.str();
}

std::string guard_to_string(const Guard &g) {
  std::ostringstream os;
  print_guard(os, g, false);
  return os.str();
}

std::string pretty_print(const SpecAst &ast) {
  std::ostringstream os;
  if (!ast.vars.empty()) {
    os << "var {\n";
    for (const auto &v : ast.vars)
      os << "    " << v.name << ": " << type_text(v.type) << ";\n";
    os << "}\n";
  }
  for (const auto &s : ast.signatures) {
    os << "signature " << s.name << " {\n";
    for (const auto &f : s.fields)
      os << "    " << f.name << ": " << type_text(f.type) << ";\n";
    os << "}\n";
  }
  for (const auto &e : ast.exprs) {
    os << "expr " << e.name << " {\n";
    print_expr(os, e.body, 1);
    os << "\n}\n";
  }
  print_expr(os, ast.main, 0);
  os << '\n';
  return os.str();
}

namespace {

bool guard_equal(const Guard &a, const Guard &b) {
  if (a.kind != b.kind)
    return false;
  if (a.kind == Guard::Kind::atom) {
    const GuardAtom &x = *a.atom;
    const GuardAtom &y = *b.atom;
    auto op_eq = [](const GuardOperand &p, const GuardOperand &q) {
      return p.kind == q.kind && p.index == q.index && p.text == q.text;
    };
    return x.equal == y.equal && op_eq(x.lhs, y.lhs) && op_eq(x.rhs, y.rhs);
  }
  if (a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!guard_equal(a.children[i], b.children[i]))
      return false;
  return true;
}

} // namespace

bool expr_equal(const ExprPtr &a, const ExprPtr &b) {
  if (a->node.index() != b->node.index())
    return false;
  if (const auto *x = std::get_if<EventAtomExpr>(&a->node)) {
    const auto &y = std::get<EventAtomExpr>(b->node);
    if (x->signature != y.signature || x->binders != y.binders)
      return false;
    if (x->guard.has_value() != y.guard.has_value())
      return false;
    return !x->guard || guard_equal(*x->guard, *y.guard);
  }
  if (const auto *x = std::get_if<SeqExpr>(&a->node)) {
    const auto &y = std::get<SeqExpr>(b->node);
    if (x->items.size() != y.items.size())
      return false;
    for (std::size_t i = 0; i < x->items.size(); ++i)
      if (!expr_equal(x->items[i], y.items[i]))
        return false;
    return true;
  }
  if (const auto *x = std::get_if<OneOfExpr>(&a->node)) {
    const auto &y = std::get<OneOfExpr>(b->node);
    if (x->branches.size() != y.branches.size())
      return false;
    for (std::size_t i = 0; i < x->branches.size(); ++i)
      if (!expr_equal(x->branches[i], y.branches[i]))
        return false;
    return true;
  }
  if (const auto *x = std::get_if<ZeroOrMoreExpr>(&a->node)) {
    return expr_equal(x->child, std::get<ZeroOrMoreExpr>(b->node).child);
  }
  if (const auto *x = std::get_if<WithinExpr>(&a->node)) {
    const auto &y = std::get<WithinExpr>(b->node);
    return x->cmp == y.cmp && x->bound == y.bound &&
           expr_equal(x->child, y.child);
  }
  const auto &x = std::get<RefExpr>(a->node);
  return x.name == std::get<RefExpr>(b->node).name;
}

bool ast_equal(const SpecAst &a, const SpecAst &b) {
  if (a.vars.size() != b.vars.size() ||
      a.signatures.size() != b.signatures.size() ||
      a.exprs.size() != b.exprs.size())
    return false;
  for (std::size_t i = 0; i < a.vars.size(); ++i)
    if (a.vars[i].name != b.vars[i].name || a.vars[i].type != b.vars[i].type)
      return false;
  for (std::size_t i = 0; i < a.signatures.size(); ++i) {
    if (a.signatures[i].name != b.signatures[i].name)
      return false;
    const auto &fa = a.signatures[i].fields;
    const auto &fb = b.signatures[i].fields;
    if (fa.size() != fb.size())
      return false;
    for (std::size_t j = 0; j < fa.size(); ++j)
      if (fa[j].name != fb[j].name || fa[j].type != fb[j].type)
        return false;
  }
  for (std::size_t i = 0; i < a.exprs.size(); ++i) {
    if (a.exprs[i].name != b.exprs[i].name ||
        !expr_equal(a.exprs[i].body, b.exprs[i].body))
      return false;
  }
  return expr_equal(a.main, b.main);
}

} // namespace patmon
