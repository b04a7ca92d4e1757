#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "falsify/errors.hpp"
#include "falsify/search.hpp"

namespace falsify {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Run configuration (JSON). Exactly one requirement source must be set:
// an inline STL string, the test suite's assessment block, or its table.

struct RunConfig {
  std::string plant;
  std::map<std::string, double> plant_constants;
  std::string test_suite_path;

  std::optional<std::string> inline_stl;
  bool use_assessment = false;
  bool use_table = false;

  std::optional<std::string> manual_fitness;
  double weight = 0.5;
  double dt = 0.01;
  SearchConfig search;
  SearchBudget budget;
  std::string output_dir = "out";

  json echo;  // the raw config document, echoed into result.json
};

namespace detail {

inline double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError("config field `" + key + "` missing or not a number");
  return j[key].get<double>();
}

inline std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError("config field `" + key + "` missing or not a string");
  return j[key].get<std::string>();
}

}  // namespace detail

inline SearchAlgorithm parse_algorithm(const std::string& s) {
  if (s == "uniform_random") return SearchAlgorithm::UniformRandom;
  if (s == "simulated_annealing") return SearchAlgorithm::SimulatedAnnealing;
  throw ConfigError("unknown search algorithm `" + s + "`");
}

inline std::string algorithm_name(SearchAlgorithm a) {
  return a == SearchAlgorithm::UniformRandom ? "uniform_random"
                                             : "simulated_annealing";
}

inline RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  cfg.echo = j;
  cfg.plant = detail::require_string(j, "plant");
  if (j.contains("plant_constants"))
    for (auto& [key, value] : j["plant_constants"].items())
      cfg.plant_constants[key] = value.get<double>();
  cfg.test_suite_path = detail::require_string(j, "test_suite");

  if (!j.contains("requirement") || !j["requirement"].is_object())
    throw ConfigError("config field `requirement` missing");
  const json& req = j["requirement"];
  int sources = 0;
  if (req.contains("stl")) {
    cfg.inline_stl = req["stl"].get<std::string>();
    ++sources;
  }
  if (req.contains("source")) {
    std::string src = req["source"].get<std::string>();
    if (src == "assessment") cfg.use_assessment = true;
    else if (src == "table") cfg.use_table = true;
    else throw ConfigError("requirement source must be `assessment` or `table`");
    ++sources;
  }
  if (sources != 1)
    throw ConfigError("exactly one requirement source must be selected");

  if (j.contains("manual_fitness"))
    cfg.manual_fitness = j["manual_fitness"].get<std::string>();
  cfg.weight = j.contains("weight") ? detail::require_number(j, "weight") : 0.5;
  if (cfg.weight < 0.0 || cfg.weight > 1.0)
    throw ConfigError("weight must lie in [0,1]");
  cfg.dt = j.contains("dt") ? detail::require_number(j, "dt") : 0.01;

  if (j.contains("search")) {
    const json& s = j["search"];
    if (s.contains("algorithm"))
      cfg.search.algorithm = parse_algorithm(s["algorithm"].get<std::string>());
    if (s.contains("seed")) cfg.search.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("initial_temperature"))
      cfg.search.initial_temperature = s["initial_temperature"].get<double>();
    if (s.contains("cooling")) cfg.search.cooling = s["cooling"].get<double>();
    if (s.contains("step_fraction"))
      cfg.search.step_fraction = s["step_fraction"].get<double>();
  }
  if (!j.contains("budget"))
    throw ConfigError("config field `budget` missing");
  const json& b = j["budget"];
  if (b.contains("max_evaluations"))
    cfg.budget.max_evaluations = b["max_evaluations"].get<std::size_t>();
  if (b.contains("max_wall_seconds"))
    cfg.budget.max_wall_seconds = b["max_wall_seconds"].get<double>();
  if (j.contains("output_dir"))
    cfg.output_dir = j["output_dir"].get<std::string>();

  if (const char* env = std::getenv("FALSIFY_SEED"))
    cfg.search.seed = std::strtoull(env, nullptr, 10);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file `" + path + "`");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config `" + path + "`: " + e.what());
  }
  RunConfig cfg = parse_run_config(j);
  // Paths in the config resolve relative to the config file.
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  if (!cfg.test_suite_path.empty() &&
      !std::filesystem::path(cfg.test_suite_path).is_absolute())
    cfg.test_suite_path = (base / cfg.test_suite_path).string();
  return cfg;
}

inline FalsificationProblem build_problem(const RunConfig& cfg) {
  std::ifstream in(cfg.test_suite_path);
  if (!in)
    throw ConfigError("cannot open test suite `" + cfg.test_suite_path + "`");
  std::stringstream buf;
  buf << in.rdbuf();
  TestSuite suite = parse_testsuite(buf.str());

  FalsificationProblem problem;
  problem.plant = get_plant(cfg.plant, cfg.plant_constants);
  problem.sequence = suite.sequence;
  if (cfg.inline_stl) {
    problem.inline_formula = parse_stl(*cfg.inline_stl);
  } else if (cfg.use_assessment) {
    if (suite.assessment.clauses.empty())
      throw ConfigError("test suite has no assess clauses");
    problem.assessment = suite.assessment;
  } else {
    if (suite.table.rows.empty())
      throw ConfigError("test suite has no requirements table");
    problem.table = suite.table;
  }
  if (cfg.manual_fitness)
    problem.manual = parse_manual_fitness(*cfg.manual_fitness);
  problem.weight = cfg.weight;
  problem.dt = cfg.dt;
  return problem;
}

// ---------------------------------------------------------------------------
// Output files.

inline std::string archive_csv(const SearchResult& result,
                               std::size_t param_count) {
  std::string out = "eval";
  for (std::size_t i = 1; i <= param_count; ++i)
    out += ",param_" + std::to_string(i);
  out += ",raw_fa,raw_fm,combined,falsified,accepted\n";
  for (const ArchiveEntry& e : result.archive) {
    out += std::to_string(e.evaluation);
    for (double p : e.params) out += "," + detail::format_full(p);
    out += "," + detail::format_full(e.fitness.raw_automatic);
    out += "," + detail::format_full(e.fitness.raw_manual);
    out += "," + detail::format_full(e.fitness.combined);
    out += e.fitness.falsified ? ",1" : ",0";
    out += e.accepted ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

namespace detail {

inline json entry_json(const ArchiveEntry& e, const SearchDomain& domain) {
  json params = json::object();
  for (std::size_t i = 0; i < e.params.size(); ++i)
    params[domain.names[i]] = e.params[i];
  json out;
  out["eval"] = e.evaluation;
  out["params"] = params;
  if (std::isfinite(e.fitness.raw_automatic)) {
    out["raw_automatic"] = e.fitness.raw_automatic;
    out["raw_manual"] = e.fitness.raw_manual;
  } else {
    out["raw_automatic"] = nullptr;  // simulation blowup, penalized
    out["raw_manual"] = nullptr;
  }
  out["normalized_automatic"] = e.fitness.normalized_automatic;
  out["normalized_manual"] = e.fitness.normalized_manual;
  out["combined"] = e.fitness.combined;
  out["weight"] = e.fitness.weight_used;
  out["falsified"] = e.fitness.falsified;
  out["accepted"] = e.accepted;
  return out;
}

inline std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace detail

inline json result_json(const SearchResult& result, const RunConfig& cfg,
                        const SearchDomain& domain) {
  json out;
  out["verdict"] = result.verdict == Verdict::Falsified ? "Falsified" : "NFF";
  out["seed"] = cfg.search.seed;
  out["evaluations"] = result.evaluations_used;
  if (!result.archive.empty())
    out["best"] = detail::entry_json(result.archive[result.best_index], domain);
  if (result.verdict == Verdict::Falsified)
    out["falsifying"] =
        detail::entry_json(result.archive[result.falsifying_index], domain);
  out["config"] = cfg.echo;
  out["elapsed_seconds"] = result.elapsed_seconds;
  out["timestamp"] = detail::timestamp_utc();
  return out;
}

// Runs one falsification and writes result.json, archive.csv, and (when a
// failure is found) falsifying_trace.csv into cfg.output_dir.
inline SearchResult run_falsify(const RunConfig& cfg) {
  FalsificationProblem problem = build_problem(cfg);
  SearchResult result = run_search(problem, cfg.search, cfg.budget);

  std::filesystem::create_directories(cfg.output_dir);
  SearchDomain domain = search_space(problem.sequence);
  {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "result.json");
    out << result_json(result, cfg, domain).dump(2) << "\n";
  }
  {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "archive.csv");
    out << archive_csv(result, domain.size());
  }
  if (result.falsifying_trace) {
    std::ofstream out(std::filesystem::path(cfg.output_dir) /
                      "falsifying_trace.csv");
    out << write_csv(*result.falsifying_trace);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Campaigns: N repetitions per sweep point, run i seeded base_seed + i - 1.

struct CampaignConfig {
  RunConfig base;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  std::vector<double> weight_sweep;          // at most one sweep axis set
  std::vector<SearchAlgorithm> algorithm_sweep;
  std::string output_dir = "out";
};

inline CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open campaign file `" + path + "`");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("campaign `" + path + "`: " + e.what());
  }
  if (!j.contains("run")) throw ConfigError("campaign field `run` missing");
  CampaignConfig cfg;
  cfg.base = parse_run_config(j["run"]);
  std::filesystem::path base_dir = std::filesystem::path(path).parent_path();
  if (!std::filesystem::path(cfg.base.test_suite_path).is_absolute())
    cfg.base.test_suite_path =
        (base_dir / cfg.base.test_suite_path).string();

  cfg.repetitions = j.contains("repetitions")
                        ? j["repetitions"].get<std::size_t>()
                        : 1;
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  cfg.base_seed = j.contains("base_seed") ? j["base_seed"].get<std::uint64_t>()
                                          : cfg.base.search.seed;
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (s.contains("weights"))
      for (const auto& w : s["weights"]) cfg.weight_sweep.push_back(w.get<double>());
    if (s.contains("algorithms"))
      for (const auto& a : s["algorithms"])
        cfg.algorithm_sweep.push_back(parse_algorithm(a.get<std::string>()));
    if (!cfg.weight_sweep.empty() && !cfg.algorithm_sweep.empty())
      throw ConfigError("sweep over weights or algorithms, not both");
  }
  if (j.contains("output_dir"))
    cfg.output_dir = j["output_dir"].get<std::string>();
  if (const char* env = std::getenv("FALSIFY_SEED"))
    cfg.base_seed = std::strtoull(env, nullptr, 10);
  return cfg;
}

struct CampaignRow {
  std::string sweep_value;
  std::size_t run = 0;  // 1-based
  std::uint64_t seed = 0;
  std::string verdict;               // Falsified / NFF / Error
  std::optional<std::size_t> evals_to_falsify;
  double elapsed = 0.0;
};

struct CampaignSummaryPoint {
  std::string sweep_value;
  std::size_t falsified = 0;
  std::size_t total = 0;
  std::optional<double> median_evals;  // over falsified runs
};

struct CampaignOutcome {
  std::vector<CampaignRow> rows;
  std::vector<CampaignSummaryPoint> summary;
};

namespace detail {

inline std::optional<double> median(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace detail

// Executes the campaign; runs within a sweep point may execute in parallel
// (jobs > 1) but rows are produced in run order regardless.
inline CampaignOutcome run_campaign(const CampaignConfig& cfg,
                                    std::size_t jobs = 1) {
  struct Point {
    std::string label;
    RunConfig config;
  };
  std::vector<Point> points;
  if (!cfg.weight_sweep.empty()) {
    for (double w : cfg.weight_sweep) {
      RunConfig c = cfg.base;
      c.weight = w;
      points.push_back({detail::format_full(w), std::move(c)});
    }
  } else if (!cfg.algorithm_sweep.empty()) {
    for (SearchAlgorithm a : cfg.algorithm_sweep) {
      RunConfig c = cfg.base;
      c.search.algorithm = a;
      points.push_back({algorithm_name(a), std::move(c)});
    }
  } else {
    points.push_back({"-", cfg.base});
  }

  CampaignOutcome outcome;
  for (const Point& point : points) {
    FalsificationProblem problem = build_problem(point.config);
    std::vector<CampaignRow> rows(cfg.repetitions);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= cfg.repetitions) return;
        CampaignRow row;
        row.sweep_value = point.label;
        row.run = i + 1;
        row.seed = cfg.base_seed + i;
        SearchConfig sc = point.config.search;
        sc.seed = row.seed;
        try {
          SearchResult r = run_search(problem, sc, point.config.budget);
          row.verdict = r.verdict == Verdict::Falsified ? "Falsified" : "NFF";
          if (r.verdict == Verdict::Falsified)
            row.evals_to_falsify = r.archive[r.falsifying_index].evaluation;
          row.elapsed = r.elapsed_seconds;
        } catch (const Error& e) {
          std::string msg = e.what();
          std::replace(msg.begin(), msg.end(), ',', ';');
          row.verdict = "Error: " + msg;
        }
        rows[i] = std::move(row);
      }
    };
    std::size_t nthreads = std::max<std::size_t>(1, std::min(jobs, cfg.repetitions));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    CampaignSummaryPoint sp;
    sp.sweep_value = point.label;
    sp.total = cfg.repetitions;
    std::vector<double> evals;
    for (CampaignRow& row : rows) {
      if (row.verdict == "Falsified") {
        ++sp.falsified;
        evals.push_back(static_cast<double>(*row.evals_to_falsify));
      }
      outcome.rows.push_back(std::move(row));
    }
    sp.median_evals = detail::median(std::move(evals));
    outcome.summary.push_back(std::move(sp));
  }
  return outcome;
}

inline std::string campaign_csv(const CampaignOutcome& outcome) {
  std::string out = "sweep_value,run,seed,verdict,evals_to_falsify,elapsed\n";
  for (const CampaignRow& r : outcome.rows) {
    out += r.sweep_value + "," + std::to_string(r.run) + "," +
           std::to_string(r.seed) + "," + r.verdict + ",";
    if (r.evals_to_falsify) out += std::to_string(*r.evals_to_falsify);
    out += "," + detail::format_full(r.elapsed) + "\n";
  }
  return out;
}

}  // namespace falsify
