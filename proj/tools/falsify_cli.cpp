// Command-line front end. Every subcommand is a thin shell over the
// library headers; see README.md for the file formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "falsify/plants.hpp"
#include "falsify/runner.hpp"
#include "falsify/stl_parser.hpp"
#include "falsify/testseq.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw falsify::ConfigError("cannot open `" + path + "`");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_falsify(const std::string& config_path, bool fail_on_falsify) {
  falsify::RunConfig cfg = falsify::load_run_config(config_path);
  falsify::SearchResult result = falsify::run_falsify(cfg);
  bool falsified = result.verdict == falsify::Verdict::Falsified;
  std::cout << (falsified ? "Falsified" : "NFF") << " after "
            << result.evaluations_used << " evaluations ("
            << result.elapsed_seconds << " s); outputs in " << cfg.output_dir
            << "\n";
  return falsified && fail_on_falsify ? 2 : 0;
}

int cmd_campaign(const std::string& campaign_path, std::size_t jobs) {
  falsify::CampaignConfig cfg = falsify::load_campaign_config(campaign_path);
  falsify::CampaignOutcome outcome = falsify::run_campaign(cfg, jobs);
  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "campaign.csv");
    out << falsify::campaign_csv(outcome);
  }
  for (const auto& sp : outcome.summary) {
    std::cout << "sweep " << sp.sweep_value << ": falsified " << sp.falsified
              << "/" << sp.total;
    if (sp.median_evals)
      std::cout << ", median evals to falsify " << *sp.median_evals;
    std::cout << "\n";
  }
  std::cout << "rows written to "
            << (std::filesystem::path(cfg.output_dir) / "campaign.csv").string()
            << "\n";
  return 0;
}

int cmd_robustness(const std::string& formula_arg, const std::string& trace_path) {
  std::string text = formula_arg;
  if (std::filesystem::exists(formula_arg)) text = slurp(formula_arg);
  falsify::FormulaPtr formula = falsify::parse_stl(text);
  falsify::Trace trace = falsify::read_csv(slurp(trace_path));
  double rho = falsify::robustness(*formula, trace);
  std::printf("%.12g\n", rho);
  return 0;
}

int cmd_compile(const std::string& suite_path) {
  falsify::TestSuite suite = falsify::parse_testsuite(slurp(suite_path));
  falsify::SearchDomain domain = falsify::search_space(suite.sequence);
  std::cout << "search space (" << domain.size() << " parameters):\n";
  for (std::size_t i = 0; i < domain.size(); ++i)
    std::cout << "  " << domain.names[i] << " in [" << domain.lower[i] << ", "
              << domain.upper[i] << "] nominal " << domain.nominal[i] << "\n";
  if (!suite.assessment.clauses.empty()) {
    auto f = falsify::compile_assessment(suite.assessment, suite.sequence);
    std::cout << "assessment formula:\n  " << falsify::pretty_print(*f) << "\n";
  }
  if (!suite.table.rows.empty()) {
    double total = 0.0;
    auto bindings = suite.sequence.nominal_bindings();
    for (const auto& step : suite.sequence.steps)
      total += step.duration.resolve(bindings);
    auto f = falsify::compile_table(suite.table, total);
    std::cout << "table formula:\n  " << falsify::pretty_print(*f) << "\n";
  }
  return 0;
}

int cmd_plants() {
  for (const falsify::PlantModel& p : falsify::list_plants()) {
    std::cout << p.name << "\n  inputs:";
    for (const auto& n : p.input_names) std::cout << " " << n;
    std::cout << "\n  outputs:";
    for (const auto& n : p.output_names) std::cout << " " << n;
    std::cout << "\n  default dt: " << p.default_dt << "\n  constants:";
    for (const auto& [k, v] : p.constants) std::cout << " " << k << "=" << v;
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based falsification of simulated plants"};
  app.require_subcommand(1);

  std::string config_path, campaign_path, formula_arg, trace_path, suite_path;
  bool fail_on_falsify = false;
  std::size_t jobs = 1;

  auto* falsify_cmd =
      app.add_subcommand("falsify", "Run one falsification search");
  falsify_cmd->add_option("config", config_path, "Run config JSON")->required();
  falsify_cmd->add_flag("--fail-on-falsify", fail_on_falsify,
                        "Exit 2 when a failure-revealing test case is found");

  auto* campaign_cmd =
      app.add_subcommand("campaign", "Run a repetition/sweep campaign");
  campaign_cmd->add_option("config", campaign_path, "Campaign config JSON")
      ->required();
  campaign_cmd->add_option("--jobs", jobs, "Parallel runs per sweep point");

  auto* robustness_cmd = app.add_subcommand(
      "robustness", "Evaluate requirement robustness on a trace CSV");
  robustness_cmd->add_option("formula", formula_arg, "STL text or file")
      ->required();
  robustness_cmd->add_option("trace", trace_path, "Trace CSV file")->required();

  auto* compile_cmd = app.add_subcommand(
      "compile", "Print a test suite's search space and compiled formula");
  compile_cmd->add_option("suite", suite_path, "Test suite file")->required();

  app.add_subcommand("plants", "List the built-in plants");

  CLI11_PARSE(app, argc, argv);

  try {
    if (falsify_cmd->parsed()) return cmd_falsify(config_path, fail_on_falsify);
    if (campaign_cmd->parsed()) return cmd_campaign(campaign_path, jobs);
    if (robustness_cmd->parsed()) return cmd_robustness(formula_arg, trace_path);
    if (compile_cmd->parsed()) return cmd_compile(suite_path);
    return cmd_plants();
  } catch (const falsify::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
