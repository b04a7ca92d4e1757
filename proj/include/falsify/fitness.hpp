#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "falsify/errors.hpp"
#include "falsify/lexer.hpp"
#include "falsify/stl.hpp"
#include "falsify/stl_parser.hpp"
#include "falsify/trace.hpp"

namespace falsify {

// ---------------------------------------------------------------------------
// Manual fitness: an arithmetic expression over whole-trace functionals.
// Engineers encode domain knowledge as a quantity to minimize, e.g.
// `1 - mean(throttle)` to push the search toward high throttle.

struct ManualFitnessExpr;
using ManualPtr = std::shared_ptr<const ManualFitnessExpr>;

struct ManualFitnessExpr {
  enum class Kind { Const, Add, Sub, Mul, Div, Neg, Abs, Functional };
  enum class Func { Min, Max, Mean, AtEnd, AtStart, Duration };

  Kind kind = Kind::Const;
  double value = 0.0;
  Func func = Func::Min;
  std::string signal;  // Functional (empty for Duration)
  ManualPtr lhs, rhs;
};

namespace detail {

class ManualParser {
public:
  explicit ManualParser(Lexer& lex) : lex_(lex) {}

  ManualPtr parse() { return parse_additive(); }

private:
  ManualPtr parse_additive() {
    ManualPtr lhs = parse_term();
    for (;;) {
      if (lex_.accept("+")) lhs = binary(ManualFitnessExpr::Kind::Add, lhs, parse_term());
      else if (lex_.accept("-")) lhs = binary(ManualFitnessExpr::Kind::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  ManualPtr parse_term() {
    ManualPtr lhs = parse_factor();
    for (;;) {
      if (lex_.accept("*")) lhs = binary(ManualFitnessExpr::Kind::Mul, lhs, parse_factor());
      else if (lex_.accept("/")) lhs = binary(ManualFitnessExpr::Kind::Div, lhs, parse_factor());
      else return lhs;
    }
  }

  ManualPtr parse_factor() {
    const Token& t = lex_.peek();
    if (lex_.accept("-")) return unary(ManualFitnessExpr::Kind::Neg, parse_factor());
    if (t.kind == Token::Kind::Number) {
      lex_.next();
      auto e = std::make_shared<ManualFitnessExpr>();
      e->kind = ManualFitnessExpr::Kind::Const;
      e->value = t.number;
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "abs") {
        lex_.next();
        lex_.expect("(");
        ManualPtr inner = parse_additive();
        lex_.expect(")");
        return unary(ManualFitnessExpr::Kind::Abs, inner);
      }
      auto func = functional_kind(t.text);
      if (func) {
        lex_.next();
        lex_.expect("(");
        auto e = std::make_shared<ManualFitnessExpr>();
        e->kind = ManualFitnessExpr::Kind::Functional;
        e->func = *func;
        if (*func != ManualFitnessExpr::Func::Duration)
          e->signal = lex_.expect_ident();
        lex_.expect(")");
        return e;
      }
      throw SyntaxError("bare signal `" + t.text +
                            "` — manual fitness reads signals through "
                            "min/max/mean/at_start/at_end",
                        t.offset);
    }
    if (lex_.accept("(")) {
      ManualPtr e = parse_additive();
      lex_.expect(")");
      return e;
    }
    throw SyntaxError("expected a term, found `" + Lexer::describe(t) + "`",
                      t.offset);
  }

  static std::optional<ManualFitnessExpr::Func> functional_kind(const std::string& s) {
    using F = ManualFitnessExpr::Func;
    if (s == "min") return F::Min;
    if (s == "max") return F::Max;
    if (s == "mean") return F::Mean;
    if (s == "at_end") return F::AtEnd;
    if (s == "at_start") return F::AtStart;
    if (s == "duration") return F::Duration;
    return std::nullopt;
  }

  static ManualPtr binary(ManualFitnessExpr::Kind k, ManualPtr l, ManualPtr r) {
    auto e = std::make_shared<ManualFitnessExpr>();
    e->kind = k;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }
  static ManualPtr unary(ManualFitnessExpr::Kind k, ManualPtr c) {
    auto e = std::make_shared<ManualFitnessExpr>();
    e->kind = k;
    e->lhs = std::move(c);
    return e;
  }

  Lexer& lex_;
};

}  // namespace detail

inline ManualPtr parse_manual_fitness(const std::string& text) {
  Lexer lex(text);
  detail::ManualParser parser(lex);
  ManualPtr e = parser.parse();
  if (!lex.at_end())
    throw SyntaxError("trailing input `" + Lexer::describe(lex.peek()) + "`",
                      lex.peek().offset);
  return e;
}

inline double eval_manual(const ManualFitnessExpr& e, const Trace& trace) {
  using K = ManualFitnessExpr::Kind;
  using F = ManualFitnessExpr::Func;
  switch (e.kind) {
    case K::Const: return e.value;
    case K::Add: return eval_manual(*e.lhs, trace) + eval_manual(*e.rhs, trace);
    case K::Sub: return eval_manual(*e.lhs, trace) - eval_manual(*e.rhs, trace);
    case K::Mul: return eval_manual(*e.lhs, trace) * eval_manual(*e.rhs, trace);
    case K::Div: {
      double denom = eval_manual(*e.rhs, trace);
      if (denom == 0.0) throw EvaluationError("division by zero");
      return eval_manual(*e.lhs, trace) / denom;
    }
    case K::Neg: return -eval_manual(*e.lhs, trace);
    case K::Abs: return std::fabs(eval_manual(*e.lhs, trace));
    case K::Functional: {
      if (e.func == F::Duration) return trace.duration();
      std::size_t col = trace.signal_index(e.signal);
      switch (e.func) {
        case F::Min: {
          double acc = trace.value(0, col);
          for (std::size_t k = 1; k < trace.sample_count(); ++k)
            acc = std::min(acc, trace.value(k, col));
          return acc;
        }
        case F::Max: {
          double acc = trace.value(0, col);
          for (std::size_t k = 1; k < trace.sample_count(); ++k)
            acc = std::max(acc, trace.value(k, col));
          return acc;
        }
        case F::Mean: {
          double sum = 0.0;
          for (std::size_t k = 0; k < trace.sample_count(); ++k)
            sum += trace.value(k, col);
          return sum / static_cast<double>(trace.sample_count());
        }
        case F::AtEnd: return trace.value(trace.sample_count() - 1, col);
        case F::AtStart: return trace.value(0, col);
        case F::Duration: break;  // handled above
      }
      break;
    }
  }
  throw EvaluationError("corrupt manual fitness node");
}

// ---------------------------------------------------------------------------
// Per-run running min-max normalization, one channel per fitness source.

class NormalizerState {
public:
  enum class Channel { Automatic, Manual };

  // Updates the channel with `raw`, then maps it into [0,1]. A channel's
  // first observation maps to the neutral 0.5.
  double normalize(double raw, Channel channel) {
    Stats& s = channel == Channel::Automatic ? automatic_ : manual_;
    if (!s.seen) {
      s.seen = true;
      s.min = s.max = raw;
      return 0.5;
    }
    s.min = std::min(s.min, raw);
    s.max = std::max(s.max, raw);
    return (raw - s.min) / (s.max - s.min + 1e-9);
  }

  bool has_observations(Channel channel) const {
    return (channel == Channel::Automatic ? automatic_ : manual_).seen;
  }

private:
  struct Stats {
    bool seen = false;
    double min = 0.0, max = 0.0;
  };
  Stats automatic_, manual_;
};

// Convex combination of the two normalized channels. The boundary weights
// reduce exactly to a single channel.
inline double combine(double normalized_automatic, double normalized_manual,
                      double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw WeightOutOfRange();
  if (weight == 1.0) return normalized_automatic;
  if (weight == 0.0) return normalized_manual;
  return weight * normalized_automatic + (1.0 - weight) * normalized_manual;
}

// Per-candidate fitness record. `falsified` is decided on the sign of the
// raw robustness alone; the combined value only guides the search.
struct FitnessReport {
  double raw_automatic = 0.0;
  double raw_manual = 0.0;
  double normalized_automatic = 0.0;
  double normalized_manual = 0.0;
  double combined = 0.0;
  double weight_used = 1.0;
  bool falsified = false;
};

// Full fitness assessment of one simulated trace. With weight 1.0 the
// manual channel is inert: the expression is not evaluated at all, so a
// weight-1.0 run is indistinguishable from a run without manual fitness.
inline FitnessReport assess(const Trace& trace, const StlFormula& formula,
                            const ManualFitnessExpr* manual, double weight,
                            NormalizerState& state) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw WeightOutOfRange();
  FitnessReport report;
  if (manual == nullptr || weight == 1.0) {
    weight = 1.0;
    report.raw_manual = 0.0;
  } else {
    report.raw_manual = eval_manual(*manual, trace);
  }
  report.weight_used = weight;
  report.raw_automatic = robustness(formula, trace);
  report.normalized_automatic =
      state.normalize(report.raw_automatic, NormalizerState::Channel::Automatic);
  report.normalized_manual =
      state.normalize(report.raw_manual, NormalizerState::Channel::Manual);
  report.combined =
      combine(report.normalized_automatic, report.normalized_manual, weight);
  report.falsified = report.raw_automatic < 0.0;
  return report;
}

}  // namespace falsify
