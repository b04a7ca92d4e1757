#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "falsify/errors.hpp"
#include "falsify/trace.hpp"

namespace falsify {

// ---------------------------------------------------------------------------
// Arithmetic expressions over signals (the predicate sides of STL formulas,
// also reused by the manual-fitness DSL).

struct ArithExpr;
using ArithPtr = std::shared_ptr<const ArithExpr>;

struct ArithExpr {
  enum class Kind { Const, Signal, Add, Sub, Mul, Div, Neg, Abs };

  Kind kind = Kind::Const;
  double value = 0.0;   // Const
  std::string signal;   // Signal
  ArithPtr lhs, rhs;

  static ArithPtr constant(double v) {
    auto e = std::make_shared<ArithExpr>();
    e->kind = Kind::Const;
    e->value = v;
    return e;
  }
  static ArithPtr sig(std::string name) {
    auto e = std::make_shared<ArithExpr>();
    e->kind = Kind::Signal;
    e->signal = std::move(name);
    return e;
  }
  static ArithPtr binary(Kind k, ArithPtr l, ArithPtr r) {
    auto e = std::make_shared<ArithExpr>();
    e->kind = k;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }
  static ArithPtr unary(Kind k, ArithPtr c) {
    auto e = std::make_shared<ArithExpr>();
    e->kind = k;
    e->lhs = std::move(c);
    return e;
  }
};

// Evaluates an arithmetic expression at one sample of a trace.
inline double eval_arith(const ArithExpr& e, const Trace& trace,
                         std::size_t sample) {
  switch (e.kind) {
    case ArithExpr::Kind::Const:
      return e.value;
    case ArithExpr::Kind::Signal:
      return trace.value(sample, trace.signal_index(e.signal));
    case ArithExpr::Kind::Add:
      return eval_arith(*e.lhs, trace, sample) + eval_arith(*e.rhs, trace, sample);
    case ArithExpr::Kind::Sub:
      return eval_arith(*e.lhs, trace, sample) - eval_arith(*e.rhs, trace, sample);
    case ArithExpr::Kind::Mul:
      return eval_arith(*e.lhs, trace, sample) * eval_arith(*e.rhs, trace, sample);
    case ArithExpr::Kind::Div: {
      double denom = eval_arith(*e.rhs, trace, sample);
      if (denom == 0.0) throw EvaluationError("division by zero");
      return eval_arith(*e.lhs, trace, sample) / denom;
    }
    case ArithExpr::Kind::Neg:
      return -eval_arith(*e.lhs, trace, sample);
    case ArithExpr::Kind::Abs:
      return std::fabs(eval_arith(*e.lhs, trace, sample));
  }
  throw EvaluationError("corrupt arithmetic node");
}

inline void collect_signals(const ArithExpr& e, std::vector<std::string>& out) {
  if (e.kind == ArithExpr::Kind::Signal) out.push_back(e.signal);
  if (e.lhs) collect_signals(*e.lhs, out);
  if (e.rhs) collect_signals(*e.rhs, out);
}

// ---------------------------------------------------------------------------
// Formulas.

enum class CmpOp { Le, Lt, Ge, Gt };

struct StlFormula;
using FormulaPtr = std::shared_ptr<const StlFormula>;

struct StlFormula {
  enum class Kind { Predicate, Not, And, Or, Implies, Globally, Eventually, Until };

  Kind kind = Kind::Predicate;
  // Predicate
  ArithPtr left, right;
  CmpOp op = CmpOp::Le;
  // Temporal bounds [a, b], seconds
  double a = 0.0, b = 0.0;
  // Children: `child` for unary and left operand, `child2` for the right
  // operand of And/Or/Implies/Until.
  FormulaPtr child, child2;

  static FormulaPtr predicate(ArithPtr l, CmpOp op, ArithPtr r) {
    auto f = std::make_shared<StlFormula>();
    f->kind = Kind::Predicate;
    f->left = std::move(l);
    f->op = op;
    f->right = std::move(r);
    return f;
  }
  static FormulaPtr negation(FormulaPtr c) {
    auto f = std::make_shared<StlFormula>();
    f->kind = Kind::Not;
    f->child = std::move(c);
    return f;
  }
  static FormulaPtr binary(Kind k, FormulaPtr l, FormulaPtr r) {
    auto f = std::make_shared<StlFormula>();
    f->kind = k;
    f->child = std::move(l);
    f->child2 = std::move(r);
    return f;
  }
  static FormulaPtr temporal(Kind k, double a, double b, FormulaPtr c,
                             FormulaPtr c2 = nullptr) {
    if (a < 0.0 || a > b)
      throw IntervalError("temporal interval requires 0 <= a <= b, got [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    auto f = std::make_shared<StlFormula>();
    f->kind = k;
    f->a = a;
    f->b = b;
    f->child = std::move(c);
    f->child2 = std::move(c2);
    return f;
  }
};

// Minimal trace duration needed to evaluate the formula at its start.
inline double horizon(const StlFormula& f) {
  switch (f.kind) {
    case StlFormula::Kind::Predicate:
      return 0.0;
    case StlFormula::Kind::Not:
      return horizon(*f.child);
    case StlFormula::Kind::And:
    case StlFormula::Kind::Or:
    case StlFormula::Kind::Implies:
      return std::max(horizon(*f.child), horizon(*f.child2));
    case StlFormula::Kind::Globally:
    case StlFormula::Kind::Eventually:
      return f.b + horizon(*f.child);
    case StlFormula::Kind::Until:
      return f.b + std::max(horizon(*f.child), horizon(*f.child2));
  }
  return 0.0;
}

namespace detail {

// Sample index nearest to time t, ties resolved to the earlier sample.
inline std::size_t nearest_index(const Trace& trace, double t) {
  double x = (t - trace.start_time()) / trace.dt();
  if (x <= 0.0) return 0;
  double fl = std::floor(x);
  double frac = x - fl;
  double k = frac > 0.5 ? fl + 1.0 : fl;  // 0.5 goes to the earlier sample
  std::size_t idx = static_cast<std::size_t>(k);
  return std::min(idx, trace.sample_count() - 1);
}

struct Window {
  std::size_t lo, hi;  // inclusive sample indices
};

// Maps [base + a, base + b] to indices base + ceil(a/dt) .. base + floor(b/dt).
// The 1e-9 slack keeps endpoints that are grid-aligned up to quotient
// rounding (e.g. 30/0.01) on the intended sample.
inline Window window_at(const Trace& trace, std::size_t base, double a, double b) {
  long off_lo = static_cast<long>(std::ceil(a / trace.dt() - 1e-9));
  long off_hi = static_cast<long>(std::floor(b / trace.dt() + 1e-9));
  if (off_lo > off_hi)
    throw EvaluationError("temporal window [" + std::to_string(a) + ", " +
                          std::to_string(b) + "] contains no sample");
  std::size_t lo = base + static_cast<std::size_t>(off_lo);
  std::size_t hi = base + static_cast<std::size_t>(off_hi);
  if (hi >= trace.sample_count()) {
    double available = trace.duration() -
                       trace.dt() * static_cast<double>(base);
    throw InsufficientHorizon(b, available);
  }
  return {lo, hi};
}

inline double robustness_at(const StlFormula& f, const Trace& trace,
                            std::size_t i) {
  switch (f.kind) {
    case StlFormula::Kind::Predicate: {
      double l = eval_arith(*f.left, trace, i);
      double r = eval_arith(*f.right, trace, i);
      // Strict comparisons share the non-strict robustness.
      return (f.op == CmpOp::Le || f.op == CmpOp::Lt) ? r - l : l - r;
    }
    case StlFormula::Kind::Not:
      return -robustness_at(*f.child, trace, i);
    case StlFormula::Kind::And:
      return std::min(robustness_at(*f.child, trace, i),
                      robustness_at(*f.child2, trace, i));
    case StlFormula::Kind::Or:
      return std::max(robustness_at(*f.child, trace, i),
                      robustness_at(*f.child2, trace, i));
    case StlFormula::Kind::Implies:
      return std::max(-robustness_at(*f.child, trace, i),
                      robustness_at(*f.child2, trace, i));
    case StlFormula::Kind::Globally: {
      Window w = window_at(trace, i, f.a, f.b);
      double acc = robustness_at(*f.child, trace, w.lo);
      for (std::size_t k = w.lo + 1; k <= w.hi; ++k)
        acc = std::min(acc, robustness_at(*f.child, trace, k));
      return acc;
    }
    case StlFormula::Kind::Eventually: {
      Window w = window_at(trace, i, f.a, f.b);
      double acc = robustness_at(*f.child, trace, w.lo);
      for (std::size_t k = w.lo + 1; k <= w.hi; ++k)
        acc = std::max(acc, robustness_at(*f.child, trace, k));
      return acc;
    }
    case StlFormula::Kind::Until: {
      Window w = window_at(trace, i, f.a, f.b);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = w.lo; j <= w.hi; ++j) {
        double v = robustness_at(*f.child2, trace, j);
        for (std::size_t m = i; m <= j; ++m)
          v = std::min(v, robustness_at(*f.child, trace, m));
        best = std::max(best, v);
      }
      return best;
    }
  }
  throw EvaluationError("corrupt formula node");
}

inline bool bool_at(const StlFormula& f, const Trace& trace, std::size_t i) {
  switch (f.kind) {
    case StlFormula::Kind::Predicate: {
      double l = eval_arith(*f.left, trace, i);
      double r = eval_arith(*f.right, trace, i);
      switch (f.op) {
        case CmpOp::Le: return l <= r;
        case CmpOp::Lt: return l < r;
        case CmpOp::Ge: return l >= r;
        case CmpOp::Gt: return l > r;
      }
      return false;
    }
    case StlFormula::Kind::Not:
      return !bool_at(*f.child, trace, i);
    case StlFormula::Kind::And:
      return bool_at(*f.child, trace, i) && bool_at(*f.child2, trace, i);
    case StlFormula::Kind::Or:
      return bool_at(*f.child, trace, i) || bool_at(*f.child2, trace, i);
    case StlFormula::Kind::Implies:
      return !bool_at(*f.child, trace, i) || bool_at(*f.child2, trace, i);
    case StlFormula::Kind::Globally: {
      Window w = window_at(trace, i, f.a, f.b);
      for (std::size_t k = w.lo; k <= w.hi; ++k)
        if (!bool_at(*f.child, trace, k)) return false;
      return true;
    }
    case StlFormula::Kind::Eventually: {
      Window w = window_at(trace, i, f.a, f.b);
      for (std::size_t k = w.lo; k <= w.hi; ++k)
        if (bool_at(*f.child, trace, k)) return true;
      return false;
    }
    case StlFormula::Kind::Until: {
      Window w = window_at(trace, i, f.a, f.b);
      for (std::size_t j = w.lo; j <= w.hi; ++j) {
        if (!bool_at(*f.child2, trace, j)) continue;
        bool ok = true;
        for (std::size_t m = i; m <= j; ++m)
          if (!bool_at(*f.child, trace, m)) { ok = false; break; }
        if (ok) return true;
      }
      return false;
    }
  }
  throw EvaluationError("corrupt formula node");
}

}  // namespace detail

// Quantitative robustness under discrete-time space semantics. Positive
// means satisfied, negative violated, zero inconclusive.
inline double robustness(const StlFormula& f, const Trace& trace) {
  double need = horizon(f);
  if (need > trace.duration())
    throw InsufficientHorizon(need, trace.duration());
  return detail::robustness_at(f, trace, 0);
}

inline double robustness(const StlFormula& f, const Trace& trace,
                         double at_time) {
  std::size_t i = detail::nearest_index(trace, at_time);
  double offset = trace.dt() * static_cast<double>(i);
  double need = horizon(f);
  if (need + offset > trace.duration())
    throw InsufficientHorizon(need, trace.duration() - offset);
  return detail::robustness_at(f, trace, i);
}

// Boolean semantics with the same window-index mapping; agrees with the
// sign of robustness whenever robustness is nonzero.
inline bool evaluate_bool(const StlFormula& f, const Trace& trace) {
  double need = horizon(f);
  if (need > trace.duration())
    throw InsufficientHorizon(need, trace.duration());
  return detail::bool_at(f, trace, 0);
}

// ---------------------------------------------------------------------------
// Printing. Output reparses to the same AST (fully parenthesized).

namespace detail {

// Shortest decimal that parses back to the same double. Integers print
// plainly (30, not 3e+01).
inline std::string format_num(double v) {
  char buf[32];
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

inline std::string pretty_print(const ArithExpr& e) {
  using K = ArithExpr::Kind;
  switch (e.kind) {
    case K::Const:
      // parenthesize negatives so the printed form reparses as a constant
      return e.value < 0 ? "(" + detail::format_num(e.value) + ")"
                         : detail::format_num(e.value);
    case K::Signal: return e.signal;
    case K::Add: return "(" + pretty_print(*e.lhs) + " + " + pretty_print(*e.rhs) + ")";
    case K::Sub: return "(" + pretty_print(*e.lhs) + " - " + pretty_print(*e.rhs) + ")";
    case K::Mul: return "(" + pretty_print(*e.lhs) + " * " + pretty_print(*e.rhs) + ")";
    case K::Div: return "(" + pretty_print(*e.lhs) + " / " + pretty_print(*e.rhs) + ")";
    case K::Neg: return "(-" + pretty_print(*e.lhs) + ")";
    case K::Abs: return "abs(" + pretty_print(*e.lhs) + ")";
  }
  return "?";
}

inline std::string pretty_print(const StlFormula& f) {
  using K = StlFormula::Kind;
  auto interval = [&] {
    return "[" + detail::format_num(f.a) + "," + detail::format_num(f.b) + "]";
  };
  switch (f.kind) {
    case K::Predicate: {
      const char* op = f.op == CmpOp::Le   ? "<="
                       : f.op == CmpOp::Lt ? "<"
                       : f.op == CmpOp::Ge ? ">="
                                           : ">";
      return pretty_print(*f.left) + " " + op + " " + pretty_print(*f.right);
    }
    case K::Not: return "not (" + pretty_print(*f.child) + ")";
    case K::And: return "(" + pretty_print(*f.child) + ") and (" + pretty_print(*f.child2) + ")";
    case K::Or: return "(" + pretty_print(*f.child) + ") or (" + pretty_print(*f.child2) + ")";
    case K::Implies: return "(" + pretty_print(*f.child) + ") -> (" + pretty_print(*f.child2) + ")";
    case K::Globally: return "G" + interval() + "(" + pretty_print(*f.child) + ")";
    case K::Eventually: return "F" + interval() + "(" + pretty_print(*f.child) + ")";
    case K::Until:
      return "(" + pretty_print(*f.child) + ") U" + interval() + " (" +
             pretty_print(*f.child2) + ")";
  }
  return "?";
}

}  // namespace falsify
