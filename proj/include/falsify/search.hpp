#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "falsify/errors.hpp"
#include "falsify/fitness.hpp"
#include "falsify/plants.hpp"
#include "falsify/rng.hpp"
#include "falsify/stl.hpp"
#include "falsify/testseq.hpp"
#include "falsify/trace.hpp"

namespace falsify {

struct SearchBudget {
  std::size_t max_evaluations = 0;
  std::optional<double> max_wall_seconds;
};

enum class SearchAlgorithm { UniformRandom, SimulatedAnnealing };

struct SearchConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::SimulatedAnnealing;
  std::uint64_t seed = 0;
  double initial_temperature = 0.1;
  double cooling = 0.95;       // geometric factor per evaluation
  double step_fraction = 0.1;  // proposal stdev as a fraction of each range
};

struct ArchiveEntry {
  std::size_t evaluation = 0;  // 1-based, contiguous
  std::vector<double> params;
  FitnessReport fitness;
  bool accepted = false;  // SA bookkeeping; always true for uniform random
  bool blowup = false;    // simulation diverged; penalized, not fatal
};

enum class Verdict { Falsified, NFF };

struct SearchResult {
  Verdict verdict = Verdict::NFF;
  std::vector<ArchiveEntry> archive;
  std::size_t best_index = 0;        // into archive; lowest combined fitness
  std::size_t falsifying_index = 0;  // valid when verdict == Falsified
  std::optional<Trace> falsifying_trace;
  std::size_t evaluations_used = 0;
  double elapsed_seconds = 0.0;
};

// What to falsify: a plant, a parameterized test sequence, and exactly one
// requirement source. The assessment and table sources are compiled per
// candidate because parameterized step durations shift scopes.
struct FalsificationProblem {
  PlantModel plant;
  TestSequenceSpec sequence;

  FormulaPtr inline_formula;                  // requirement source 1
  std::optional<AssessmentSpec> assessment;   // requirement source 2
  std::optional<RequirementsTable> table;     // requirement source 3

  ManualPtr manual;
  double weight = 0.5;
  double dt = 0.01;

  FormulaPtr formula_for(const std::vector<double>& values) const {
    if (inline_formula) return inline_formula;
    auto bindings = detail::bind_values(sequence, values);
    auto durations = detail::step_durations(sequence, bindings);
    if (assessment) return compile_assessment(*assessment, durations);
    if (table) {
      double total = 0.0;
      for (double d : durations) total += d;
      return compile_table(*table, total);
    }
    throw ConfigError("problem has no requirement source");
  }
};

// One uniform draw per dimension, in declaration order.
inline std::vector<double> propose_uniform(Rng& rng, const SearchDomain& domain) {
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = rng.uniform(domain.lower[i], domain.upper[i]);
  return v;
}

namespace detail {

// Mirrors a value into [lo, hi], repeating until interior.
inline double reflect(double v, double lo, double hi) {
  if (lo == hi) return lo;
  for (int guard = 0; guard < 64; ++guard) {
    if (v < lo) v = 2.0 * lo - v;
    else if (v > hi) v = 2.0 * hi - v;
    else return v;
  }
  // wildly out of range; fold into the box directly
  double span = hi - lo;
  double r = std::fmod(v - lo, 2.0 * span);
  if (r < 0.0) r += 2.0 * span;
  return r <= span ? lo + r : hi - (r - span);
}

}  // namespace detail

// Gaussian perturbation of `current`, stdev step_fraction*(upper-lower)
// per dimension, reflected at the bounds. Consumes one normal draw per
// dimension in order.
inline std::vector<double> propose_neighbor(const std::vector<double>& current,
                                            Rng& rng, const SearchDomain& domain,
                                            double step_fraction) {
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double sigma = step_fraction * (domain.upper[i] - domain.lower[i]);
    double raw = current[i] + sigma * rng.normal();
    v[i] = detail::reflect(raw, domain.lower[i], domain.upper[i]);
  }
  return v;
}

// Metropolis rule: improvements always accepted; uphill moves with
// probability exp(-delta/temperature). Draws from the rng only when an
// uphill move needs a coin.
inline bool metropolis_accept(double delta, double temperature, Rng& rng) {
  if (delta <= 0.0) return true;
  return rng.next_double() < std::exp(-delta / temperature);
}

namespace detail {

struct Evaluation {
  FitnessReport fitness;
  bool blowup = false;
  std::optional<Trace> output;
};

inline Evaluation evaluate_candidate(const FalsificationProblem& problem,
                                     const std::vector<double>& values,
                                     NormalizerState& normalizer) {
  Evaluation ev;
  Trace input = instantiate(problem.sequence, values, problem.dt);
  FormulaPtr formula = problem.formula_for(values);
  try {
    Trace output = simulate(problem.plant, input);
    ev.fitness = assess(output, *formula,
                        problem.manual ? problem.manual.get() : nullptr,
                        problem.weight, normalizer);
    ev.output = std::move(output);
  } catch (const NumericalBlowup&) {
    // Hostile corner of the input space: penalize and keep searching.
    ev.blowup = true;
    ev.fitness.raw_automatic = std::numeric_limits<double>::infinity();
    ev.fitness.raw_manual = std::numeric_limits<double>::infinity();
    ev.fitness.normalized_automatic = 1.0;
    ev.fitness.normalized_manual = 1.0;
    ev.fitness.combined = 1.0;
    ev.fitness.weight_used = problem.weight;
    ev.fitness.falsified = false;
  }
  return ev;
}

}  // namespace detail

inline SearchResult run_search(const FalsificationProblem& problem,
                               const SearchConfig& config,
                               const SearchBudget& budget) {
  SearchDomain domain = search_space(problem.sequence);
  const bool sa = config.algorithm == SearchAlgorithm::SimulatedAnnealing;
  if (sa && domain.size() == 0)
    throw ConfigError("simulated annealing needs at least one search parameter");

  Rng rng(config.seed);
  NormalizerState normalizer;
  SearchResult result;
  auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  double temperature = config.initial_temperature;
  std::vector<double> current;
  double current_fitness = 0.0;
  // A zero evaluation cap means "until the wall clock runs out" when a wall
  // limit exists, and an immediate NFF otherwise. Zero searchable parameters
  // degenerates to at most one evaluation.
  std::size_t max_evals = budget.max_evaluations;
  if (max_evals == 0 && budget.max_wall_seconds)
    max_evals = std::numeric_limits<std::size_t>::max();
  if (domain.size() == 0) max_evals = std::min<std::size_t>(max_evals, 1);

  for (std::size_t eval = 1; eval <= max_evals; ++eval) {
    if (budget.max_wall_seconds && elapsed() > *budget.max_wall_seconds) break;

    std::vector<double> candidate;
    if (!sa) {
      candidate = propose_uniform(rng, domain);
    } else if (eval == 1) {
      candidate = domain.nominal;  // the engineer's original test
    } else {
      candidate =
          propose_neighbor(current, rng, domain, config.step_fraction);
    }

    detail::Evaluation ev =
        detail::evaluate_candidate(problem, candidate, normalizer);

    bool accepted = true;
    if (sa) {
      if (eval == 1) {
        accepted = true;
      } else {
        double delta = ev.fitness.combined - current_fitness;
        accepted = metropolis_accept(delta, temperature, rng);
      }
      if (accepted) {
        current = candidate;
        current_fitness = ev.fitness.combined;
      }
      temperature *= config.cooling;
    }

    ArchiveEntry entry;
    entry.evaluation = eval;
    entry.params = candidate;
    entry.fitness = ev.fitness;
    entry.accepted = accepted;
    entry.blowup = ev.blowup;
    result.archive.push_back(std::move(entry));

    if (ev.fitness.falsified) {
      result.verdict = Verdict::Falsified;
      result.falsifying_index = result.archive.size() - 1;
      result.falsifying_trace = std::move(ev.output);
      break;
    }
  }

  result.evaluations_used = result.archive.size();
  result.elapsed_seconds = elapsed();
  result.best_index = 0;
  for (std::size_t i = 1; i < result.archive.size(); ++i)
    if (result.archive[i].fitness.combined <
        result.archive[result.best_index].fitness.combined)
      result.best_index = i;
  return result;
}

}  // namespace falsify
