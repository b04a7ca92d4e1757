#pragma once

#include <string>

#include "falsify/lexer.hpp"
#include "falsify/stl.hpp"

namespace falsify {

namespace detail {

// Recursive-descent parser for the requirement grammar. Precedence,
// loosest first: `->` (right-assoc), `or`, `and`, `U[a,b]`, unary/temporal,
// then comparisons over arithmetic with the usual * / over + - rules.
class StlParser {
public:
  explicit StlParser(Lexer& lex) : lex_(lex) {}

  FormulaPtr parse_formula() { return parse_implies(); }

  ArithPtr parse_arith() { return parse_additive(); }

private:
  FormulaPtr parse_implies() {
    FormulaPtr lhs = parse_or();
    if (lex_.accept("->"))
      return StlFormula::binary(StlFormula::Kind::Implies, lhs, parse_implies());
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (is_keyword("or")) {
      lex_.next();
      lhs = StlFormula::binary(StlFormula::Kind::Or, lhs, parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_until();
    while (is_keyword("and")) {
      lex_.next();
      lhs = StlFormula::binary(StlFormula::Kind::And, lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    while (is_keyword("U") && lex_.peek(1).text == "[") {
      lex_.next();
      auto [a, b] = parse_interval();
      lhs = StlFormula::temporal(StlFormula::Kind::Until, a, b, lhs, parse_unary());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (is_keyword("not")) {
      lex_.next();
      return StlFormula::negation(parse_unary());
    }
    if (is_keyword("G") && lex_.peek(1).text == "[") {
      lex_.next();
      auto [a, b] = parse_interval();
      return StlFormula::temporal(StlFormula::Kind::Globally, a, b, parse_unary());
    }
    if (is_keyword("F") && lex_.peek(1).text == "[") {
      lex_.next();
      auto [a, b] = parse_interval();
      return StlFormula::temporal(StlFormula::Kind::Eventually, a, b, parse_unary());
    }
    return parse_atom();
  }

  // An atom is either a predicate `arith cmp arith` or a parenthesized
  // formula. `(` is ambiguous between the two; try the predicate reading
  // first and backtrack.
  FormulaPtr parse_atom() {
    std::size_t mark = lex_.position();
    try {
      ArithPtr l = parse_additive();
      CmpOp op;
      if (lex_.accept("<=")) op = CmpOp::Le;
      else if (lex_.accept(">=")) op = CmpOp::Ge;
      else if (lex_.accept("<")) op = CmpOp::Lt;
      else if (lex_.accept(">")) op = CmpOp::Gt;
      else
        throw SyntaxError("expected a comparison operator", lex_.peek().offset);
      ArithPtr r = parse_additive();
      return StlFormula::predicate(l, op, r);
    } catch (const SyntaxError&) {
      lex_.rewind(mark);
    }
    if (lex_.accept("(")) {
      FormulaPtr f = parse_implies();
      lex_.expect(")");
      return f;
    }
    throw SyntaxError("expected a predicate or `(`, found `" +
                          Lexer::describe(lex_.peek()) + "`",
                      lex_.peek().offset);
  }

  std::pair<double, double> parse_interval() {
    lex_.expect("[");
    double a = lex_.expect_number();
    lex_.expect(",");
    double b = lex_.expect_number();
    lex_.expect("]");
    if (a < 0.0 || a > b)
      throw IntervalError("temporal interval requires 0 <= a <= b, got [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    return {a, b};
  }

  ArithPtr parse_additive() {
    ArithPtr lhs = parse_term();
    for (;;) {
      if (lex_.accept("+"))
        lhs = ArithExpr::binary(ArithExpr::Kind::Add, lhs, parse_term());
      else if (lex_.accept("-"))
        lhs = ArithExpr::binary(ArithExpr::Kind::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  ArithPtr parse_term() {
    ArithPtr lhs = parse_factor();
    for (;;) {
      if (lex_.accept("*"))
        lhs = ArithExpr::binary(ArithExpr::Kind::Mul, lhs, parse_factor());
      else if (lex_.accept("/"))
        lhs = ArithExpr::binary(ArithExpr::Kind::Div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  ArithPtr parse_factor() {
    const Token& t = lex_.peek();
    if (lex_.accept("-")) {
      // fold a literal sign into the constant so -5 and (-5) parse alike
      if (lex_.peek().kind == Token::Kind::Number)
        return ArithExpr::constant(-lex_.next().number);
      return ArithExpr::unary(ArithExpr::Kind::Neg, parse_factor());
    }
    if (is_keyword("abs") && lex_.peek(1).text == "(") {
      lex_.next();
      lex_.next();
      ArithPtr inner = parse_additive();
      lex_.expect(")");
      return ArithExpr::unary(ArithExpr::Kind::Abs, inner);
    }
    if (t.kind == Token::Kind::Number) {
      lex_.next();
      return ArithExpr::constant(t.number);
    }
    if (t.kind == Token::Kind::Ident) {
      lex_.next();
      return ArithExpr::sig(t.text);
    }
    if (lex_.accept("(")) {
      ArithPtr e = parse_additive();
      lex_.expect(")");
      return e;
    }
    throw SyntaxError("expected an arithmetic term, found `" +
                          Lexer::describe(t) + "`",
                      t.offset);
  }

  bool is_keyword(const char* kw) const {
    const Token& t = lex_.peek();
    return t.kind == Token::Kind::Ident && t.text == kw;
  }

  Lexer& lex_;
};

}  // namespace detail

// Parses a requirement string into a formula AST.
inline FormulaPtr parse_stl(const std::string& text) {
  Lexer lex(text);
  detail::StlParser parser(lex);
  FormulaPtr f = parser.parse_formula();
  if (!lex.at_end())
    throw SyntaxError("trailing input `" + Lexer::describe(lex.peek()) + "`",
                      lex.peek().offset);
  return f;
}

// Parses a bare arithmetic expression (used by predicate sides and by the
// test-suite format's expression arguments).
inline ArithPtr parse_arith(const std::string& text) {
  Lexer lex(text);
  detail::StlParser parser(lex);
  ArithPtr e = parser.parse_arith();
  if (!lex.at_end())
    throw SyntaxError("trailing input `" + Lexer::describe(lex.peek()) + "`",
                      lex.peek().offset);
  return e;
}

}  // namespace falsify
