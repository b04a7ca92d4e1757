#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "falsify/errors.hpp"
#include "falsify/lexer.hpp"
#include "falsify/stl.hpp"
#include "falsify/stl_parser.hpp"
#include "falsify/trace.hpp"

namespace falsify {

// ---------------------------------------------------------------------------
// Parameterized test sequences: the engineer's manually written test with
// search parameters injected, plus the assessment that judges it.

struct SearchParameter {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double nominal = 0.0;
};

struct TestStep {
  ParamOrValue duration{0.0};
  // Assignments in declaration order; every step assigns every input.
  std::vector<std::pair<std::string, SignalExpression>> assignments;
};

struct TestSequenceSpec {
  std::vector<SearchParameter> parameters;
  std::vector<TestStep> steps;

  const SearchParameter* find_parameter(const std::string& name) const {
    for (const auto& p : parameters)
      if (p.name == name) return &p;
    return nullptr;
  }

  std::map<std::string, double> nominal_bindings() const {
    std::map<std::string, double> out;
    for (const auto& p : parameters) out[p.name] = p.nominal;
    return out;
  }

  // Input names in declaration order of the first step.
  std::vector<std::string> input_names() const {
    std::vector<std::string> out;
    for (const auto& [name, expr] : steps.front().assignments) out.push_back(name);
    return out;
  }
};

struct AssessmentClause {
  enum class Scope { Always, Step, After };
  Scope scope = Scope::Always;
  std::size_t step_index = 0;  // 1-based, Scope::Step
  double after_time = 0.0;     // Scope::After
  FormulaPtr condition;
};

struct AssessmentSpec {
  std::vector<AssessmentClause> clauses;
};

struct RequirementsTableRow {
  FormulaPtr precondition;
  FormulaPtr postcondition;
};

struct RequirementsTable {
  std::vector<RequirementsTableRow> rows;
};

// One parsed test-suite file.
struct TestSuite {
  TestSequenceSpec sequence;
  AssessmentSpec assessment;
  RequirementsTable table;  // empty when the file has no table block
};

// Box-bounded search domain extracted from a spec, in declaration order.
struct SearchDomain {
  std::vector<std::string> names;
  std::vector<double> lower, upper, nominal;

  std::size_t size() const { return names.size(); }
};

// ---------------------------------------------------------------------------
// Parsing. Block grammar:
//   param <name> in [<lo>, <hi>] nominal <v>;
//   step <dur|param> { <input> = <expr>; ... }
//   assess always: <stl>;  |  assess step <k>: <stl>;  |  assess after <t>: <stl>;
//   table { row: <pre> => <post>; ... }
// with <expr> one of const(a), ramp(from,to), step(before,after,frac),
// sine(offset,amplitude,period,phase); arguments are literals or parameter
// names.

namespace detail {

class TestSuiteParser {
public:
  explicit TestSuiteParser(Lexer& lex) : lex_(lex) {}

  TestSuite parse() {
    TestSuite suite;
    while (!lex_.at_end()) {
      const Token& t = lex_.peek();
      if (t.text == "param") parse_param(suite);
      else if (t.text == "step") parse_step(suite);
      else if (t.text == "assess") parse_assess(suite);
      else if (t.text == "table") parse_table(suite);
      else
        throw SyntaxError("expected param/step/assess/table, found `" +
                              Lexer::describe(t) + "`",
                          t.offset);
    }
    validate(suite);
    return suite;
  }

private:
  void parse_param(TestSuite& suite) {
    lex_.expect("param");
    SearchParameter p;
    p.name = lex_.expect_ident();
    lex_.expect("in");
    lex_.expect("[");
    p.lower = lex_.expect_number();
    lex_.expect(",");
    p.upper = lex_.expect_number();
    lex_.expect("]");
    lex_.expect("nominal");
    p.nominal = lex_.expect_number();
    lex_.expect(";");
    if (p.lower > p.upper || p.nominal < p.lower || p.nominal > p.upper)
      throw SyntaxError("parameter " + p.name +
                            " requires lower <= nominal <= upper",
                        lex_.peek().offset);
    if (suite.sequence.find_parameter(p.name))
      throw SyntaxError("duplicate parameter " + p.name, lex_.peek().offset);
    suite.sequence.parameters.push_back(std::move(p));
  }

  void parse_step(TestSuite& suite) {
    lex_.expect("step");
    TestStep step;
    step.duration = parse_param_or_value();
    lex_.expect("{");
    while (!lex_.accept("}")) {
      std::string input = lex_.expect_ident();
      lex_.expect("=");
      SignalExpression expr = parse_signal_expr();
      lex_.expect(";");
      for (const auto& [name, e] : step.assignments)
        if (name == input)
          throw SyntaxError("input " + input + " assigned twice in one step",
                            lex_.peek().offset);
      step.assignments.emplace_back(std::move(input), expr);
    }
    suite.sequence.steps.push_back(std::move(step));
  }

  SignalExpression parse_signal_expr() {
    const Token& t = lex_.peek();
    std::string fn = lex_.expect_ident();
    auto args = parse_args();
    auto need = [&](std::size_t n) {
      if (args.size() != n)
        throw SyntaxError(fn + " takes " + std::to_string(n) + " argument(s)",
                          t.offset);
    };
    if (fn == "const") { need(1); return SignalExpression::constant(args[0]); }
    if (fn == "ramp") { need(2); return SignalExpression::ramp(args[0], args[1]); }
    if (fn == "step") { need(3); return SignalExpression::step(args[0], args[1], args[2]); }
    if (fn == "sine") { need(4); return SignalExpression::sine(args[0], args[1], args[2], args[3]); }
    throw SyntaxError("unknown signal expression `" + fn + "`", t.offset);
  }

  std::vector<ParamOrValue> parse_args() {
    lex_.expect("(");
    std::vector<ParamOrValue> args;
    if (!lex_.accept(")")) {
      do {
        args.push_back(parse_param_or_value());
      } while (lex_.accept(","));
      lex_.expect(")");
    }
    return args;
  }

  ParamOrValue parse_param_or_value() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Ident) {
      lex_.next();
      return ParamOrValue(t.text);
    }
    return ParamOrValue(lex_.expect_number());
  }

  void parse_assess(TestSuite& suite) {
    lex_.expect("assess");
    AssessmentClause clause;
    const Token& t = lex_.peek();
    if (lex_.accept("always")) {
      clause.scope = AssessmentClause::Scope::Always;
    } else if (lex_.accept("step")) {
      double k = lex_.expect_number();
      if (k < 1.0 || k != std::floor(k))
        throw SyntaxError("step scope needs a positive integer index", t.offset);
      clause.scope = AssessmentClause::Scope::Step;
      clause.step_index = static_cast<std::size_t>(k);
    } else if (lex_.accept("after")) {
      clause.scope = AssessmentClause::Scope::After;
      clause.after_time = lex_.expect_number();
    } else {
      throw SyntaxError("expected always/step/after, found `" +
                            Lexer::describe(t) + "`",
                        t.offset);
    }
    lex_.expect(":");
    StlParser stl(lex_);
    clause.condition = stl.parse_formula();
    lex_.expect(";");
    suite.assessment.clauses.push_back(std::move(clause));
  }

  void parse_table(TestSuite& suite) {
    lex_.expect("table");
    lex_.expect("{");
    while (!lex_.accept("}")) {
      lex_.expect("row");
      lex_.expect(":");
      StlParser stl(lex_);
      RequirementsTableRow row;
      row.precondition = stl.parse_formula();
      lex_.expect("=>");
      row.postcondition = stl.parse_formula();
      lex_.expect(";");
      suite.table.rows.push_back(std::move(row));
    }
    if (suite.table.rows.empty())
      throw SyntaxError("table needs at least one row", lex_.peek().offset);
  }

  void validate(const TestSuite& suite) {
    const TestSequenceSpec& seq = suite.sequence;
    if (seq.steps.empty())
      throw SyntaxError("test suite needs at least one step", 0);

    auto check_param = [&](const std::string& name) {
      if (!seq.find_parameter(name)) throw UndeclaredParameter(name);
    };
    std::set<std::string> all_inputs;
    for (const auto& step : seq.steps) {
      if (!step.duration.param.empty()) check_param(step.duration.param);
      for (const auto& [input, expr] : step.assignments) {
        all_inputs.insert(input);
        for (const auto& p : expr.referenced_params()) check_param(p);
      }
    }
    for (std::size_t i = 0; i < seq.steps.size(); ++i)
      for (const auto& input : all_inputs) {
        bool found = false;
        for (const auto& [name, e] : seq.steps[i].assignments)
          if (name == input) { found = true; break; }
        if (!found)
          throw MissingInputAssignment("step " + std::to_string(i + 1) +
                                       " does not assign input " + input);
      }

    for (const auto& clause : suite.assessment.clauses) {
      if (clause.scope == AssessmentClause::Scope::Step &&
          clause.step_index > seq.steps.size())
        throw ScopeError("assess step " + std::to_string(clause.step_index) +
                         ": only " + std::to_string(seq.steps.size()) +
                         " steps exist");
    }
  }

  Lexer& lex_;
};

}  // namespace detail

inline TestSuite parse_testsuite(const std::string& text) {
  Lexer lex(text);
  detail::TestSuiteParser parser(lex);
  return parser.parse();
}

inline SearchDomain search_space(const TestSequenceSpec& spec) {
  SearchDomain dom;
  for (const auto& p : spec.parameters) {
    dom.names.push_back(p.name);
    dom.lower.push_back(p.lower);
    dom.upper.push_back(p.upper);
    dom.nominal.push_back(p.nominal);
  }
  return dom;
}

namespace detail {

inline std::map<std::string, double> bind_values(
    const TestSequenceSpec& spec, const std::vector<double>& values) {
  if (values.size() != spec.parameters.size())
    throw Error("expected " + std::to_string(spec.parameters.size()) +
                " parameter values, got " + std::to_string(values.size()));
  std::map<std::string, double> bindings;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const SearchParameter& p = spec.parameters[i];
    if (values[i] < p.lower || values[i] > p.upper) throw OutOfBounds(p.name);
    bindings[p.name] = values[i];
  }
  return bindings;
}

// Resolved step durations for a candidate.
inline std::vector<double> step_durations(
    const TestSequenceSpec& spec, const std::map<std::string, double>& bindings) {
  std::vector<double> out;
  for (const auto& step : spec.steps) out.push_back(step.duration.resolve(bindings));
  return out;
}

}  // namespace detail

// Builds the input trace for one candidate parameter vector: each step's
// expressions sampled on its own grid, steps joined with concat (shared
// boundary sample).
inline Trace instantiate(const TestSequenceSpec& spec,
                         const std::vector<double>& values, double dt) {
  if (dt <= 0.0) throw NonPositiveDt();
  auto bindings = detail::bind_values(spec, values);
  std::vector<Trace> pieces;
  double t0 = 0.0;
  for (const auto& step : spec.steps) {
    double dur = step.duration.resolve(bindings);
    if (dur < dt) throw Error("step duration shorter than dt");
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    for (const auto& [input, expr] : step.assignments) {
      names.push_back(input);
      columns.push_back(sample_expression(expr, bindings, t0, dur, dt));
    }
    std::size_t n = columns.front().size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(names.size()));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < names.size(); ++j) rows[k][j] = columns[j][k];
    pieces.emplace_back(t0, dt, names, std::move(rows));
    t0 += static_cast<double>(n - 1) * dt;
  }
  return concat(pieces);
}

// Compiles the assessment into one formula for the given step durations.
// always -> G[0,H]; step k -> G[s_k, e_k]; after t -> G[t,H]; clauses are
// conjoined. Durations are per-candidate because parameterized step
// durations shift later scopes.
inline FormulaPtr compile_assessment(const AssessmentSpec& assessment,
                                     const std::vector<double>& durations) {
  if (assessment.clauses.empty())
    throw ScopeError("assessment has no clauses");
  double total = 0.0;
  std::vector<double> starts;
  for (double d : durations) {
    starts.push_back(total);
    total += d;
  }
  FormulaPtr result;
  for (const auto& clause : assessment.clauses) {
    double lo = 0.0, hi = total;
    switch (clause.scope) {
      case AssessmentClause::Scope::Always:
        break;
      case AssessmentClause::Scope::Step: {
        if (clause.step_index < 1 || clause.step_index > durations.size())
          throw ScopeError("step index out of range");
        lo = starts[clause.step_index - 1];
        hi = lo + durations[clause.step_index - 1];
        break;
      }
      case AssessmentClause::Scope::After:
        if (clause.after_time > total)
          throw ScopeError("after-scope start exceeds the test duration");
        lo = clause.after_time;
        break;
    }
    double inner = horizon(*clause.condition);
    if (hi + inner > total)
      throw ScopeError("clause horizon " + std::to_string(hi + inner) +
                       " s exceeds the test duration " + std::to_string(total) +
                       " s");
    FormulaPtr g = StlFormula::temporal(StlFormula::Kind::Globally, lo, hi,
                                        clause.condition);
    result = result ? StlFormula::binary(StlFormula::Kind::And, result, g) : g;
  }
  return result;
}

// Convenience overload at nominal durations.
inline FormulaPtr compile_assessment(const AssessmentSpec& assessment,
                                     const TestSequenceSpec& spec) {
  return compile_assessment(
      assessment, detail::step_durations(spec, spec.nominal_bindings()));
}

// Compiles a requirements table into And over rows of G[0,H](pre -> post).
inline FormulaPtr compile_table(const RequirementsTable& table, double horizon_s) {
  if (table.rows.empty()) throw ScopeError("requirements table is empty");
  FormulaPtr result;
  for (const auto& row : table.rows) {
    FormulaPtr impl = StlFormula::binary(StlFormula::Kind::Implies,
                                         row.precondition, row.postcondition);
    FormulaPtr g =
        StlFormula::temporal(StlFormula::Kind::Globally, 0.0, horizon_s, impl);
    result = result ? StlFormula::binary(StlFormula::Kind::And, result, g) : g;
  }
  return result;
}

// Total nominal test duration in seconds.
inline double total_duration(const TestSequenceSpec& spec,
                             const std::vector<double>& values) {
  auto bindings = detail::bind_values(spec, values);
  double total = 0.0;
  for (double d : detail::step_durations(spec, bindings)) total += d;
  return total;
}

}  // namespace falsify
