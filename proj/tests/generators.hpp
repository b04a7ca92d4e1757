#pragma once

// Deterministic random-case generators for the property suites.

#include <string>
#include <vector>

#include "falsify/rng.hpp"
#include "falsify/stl.hpp"
#include "falsify/trace.hpp"

namespace testgen {

inline std::vector<std::string> signal_pool() { return {"x", "y", "z"}; }

inline falsify::Trace random_trace(falsify::Rng& rng, std::size_t max_samples = 50) {
  auto pool = signal_pool();
  std::size_t n_signals = 1 + rng.next_u64() % pool.size();
  std::vector<std::string> names(pool.begin(), pool.begin() + n_signals);
  std::size_t n = 3 + rng.next_u64() % (max_samples - 2);
  double dts[] = {0.25, 0.5, 1.0};
  double dt = dts[rng.next_u64() % 3];
  std::vector<std::vector<double>> values(n, std::vector<double>(n_signals));
  for (auto& row : values)
    for (auto& v : row) v = rng.uniform(-10.0, 10.0);
  return falsify::Trace(0.0, dt, names, values);
}

inline falsify::ArithPtr random_arith(falsify::Rng& rng,
                                      const std::vector<std::string>& names,
                                      int depth) {
  using falsify::ArithExpr;
  if (depth <= 0 || rng.next_u64() % 3 == 0) {
    if (rng.next_u64() % 2 == 0)
      return ArithExpr::constant(rng.uniform(-10.0, 10.0));
    return ArithExpr::sig(names[rng.next_u64() % names.size()]);
  }
  switch (rng.next_u64() % 5) {
    case 0:
      return ArithExpr::binary(ArithExpr::Kind::Add,
                               random_arith(rng, names, depth - 1),
                               random_arith(rng, names, depth - 1));
    case 1:
      return ArithExpr::binary(ArithExpr::Kind::Sub,
                               random_arith(rng, names, depth - 1),
                               random_arith(rng, names, depth - 1));
    case 2:
      return ArithExpr::binary(ArithExpr::Kind::Mul,
                               random_arith(rng, names, depth - 1),
                               random_arith(rng, names, depth - 1));
    case 3:
      return ArithExpr::unary(ArithExpr::Kind::Neg,
                              random_arith(rng, names, depth - 1));
    default:
      return ArithExpr::unary(ArithExpr::Kind::Abs,
                              random_arith(rng, names, depth - 1));
  }
}

// Random formula whose horizon is at most `budget` seconds, with all
// interval endpoints on the dt grid so temporal windows are never empty.
inline falsify::FormulaPtr random_formula(falsify::Rng& rng,
                                          const std::vector<std::string>& names,
                                          int depth, double dt, double budget) {
  using falsify::CmpOp;
  using falsify::StlFormula;
  auto predicate = [&] {
    CmpOp ops[] = {CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt};
    return StlFormula::predicate(random_arith(rng, names, 2),
                                 ops[rng.next_u64() % 4],
                                 random_arith(rng, names, 2));
  };
  if (depth <= 0) return predicate();

  auto interval = [&](double max_b) {
    std::size_t max_steps = static_cast<std::size_t>(max_b / dt);
    std::size_t b_steps = max_steps == 0 ? 0 : rng.next_u64() % (max_steps + 1);
    std::size_t a_steps = b_steps == 0 ? 0 : rng.next_u64() % (b_steps + 1);
    return std::pair<double, double>(static_cast<double>(a_steps) * dt,
                                     static_cast<double>(b_steps) * dt);
  };

  switch (rng.next_u64() % 8) {
    case 0:
      return predicate();
    case 1:
      return StlFormula::negation(
          random_formula(rng, names, depth - 1, dt, budget));
    case 2:
      return StlFormula::binary(StlFormula::Kind::And,
                                random_formula(rng, names, depth - 1, dt, budget),
                                random_formula(rng, names, depth - 1, dt, budget));
    case 3:
      return StlFormula::binary(StlFormula::Kind::Or,
                                random_formula(rng, names, depth - 1, dt, budget),
                                random_formula(rng, names, depth - 1, dt, budget));
    case 4:
      return StlFormula::binary(StlFormula::Kind::Implies,
                                random_formula(rng, names, depth - 1, dt, budget),
                                random_formula(rng, names, depth - 1, dt, budget));
    case 5: {
      auto [a, b] = interval(budget);
      return StlFormula::temporal(
          StlFormula::Kind::Globally, a, b,
          random_formula(rng, names, depth - 1, dt, budget - b));
    }
    case 6: {
      auto [a, b] = interval(budget);
      return StlFormula::temporal(
          StlFormula::Kind::Eventually, a, b,
          random_formula(rng, names, depth - 1, dt, budget - b));
    }
    default: {
      auto [a, b] = interval(budget);
      return StlFormula::temporal(
          StlFormula::Kind::Until, a, b,
          random_formula(rng, names, depth - 1, dt, budget - b),
          random_formula(rng, names, depth - 1, dt, budget - b));
    }
  }
}

}  // namespace testgen
