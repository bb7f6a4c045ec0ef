#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"
#include "heatrl/harness.hpp"

namespace {

void print_error(const std::string& command, const std::string& kind, const std::string& message) {
  nlohmann::json err{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
}

void print_report(const heatrl::RunReport& r) {
  nlohmann::json out{{"status", "ok"},
                     {"scenario", r.scenario},
                     {"agent", heatrl::to_string(r.agent)},
                     {"agent_log", r.agent_log_path.string()},
                     {"baseline_log", r.baseline_log_path.string()},
                     {"consumption_change_pct", r.metrics.consumption_change_pct},
                     {"cost_change_pct", r.metrics.cost_change_pct},
                     {"comfort_loss_eur", r.metrics.comfort_loss_eur},
                     {"convergence_day", r.convergence.day},
                     {"convergence_hours", r.convergence.hours},
                     {"wall_clock_s", r.wall_clock_seconds}};
  std::cout << out.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-pump demand-response controller benchmark"};
  app.require_subcommand(1);

  std::string scenario_file, agent, price, out_dir = "out";
  int days = 0;
  long long seed = -1;
  auto* run = app.add_subcommand("run", "Run one agent and the rule-based baseline on one scenario");
  run->add_option("--scenario", scenario_file, "Key-value scenario file")->check(CLI::ExistingFile);
  run->add_option("--agent", agent, "rbc | mpc | mbrl | mfrl");
  run->add_option("--price", price, "flat | dual | rtp");
  run->add_option("--days", days, "Run length in days")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Random seed")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "Output directory");

  std::string suite_file, suite_out = "out";
  auto* suite = app.add_subcommand("suite", "Run every configured agent on every configured seed");
  suite->add_option("--config", suite_file, "Key-value suite file")->required()->check(CLI::ExistingFile);
  suite->add_option("--out", suite_out, "Output directory");

  std::string plot_kind, plot_log, plot_out = "out", plot_scenario;
  auto* plot = app.add_subcommand("plot", "Derive plot-ready CSVs from a log");
  plot->add_option("--kind", plot_kind, "temperature_trace | action_histogram | hourly_action_heatmap | model_mae")
      ->required();
  plot->add_option("--log", plot_log, "Episode log or MAE CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output directory");
  plot->add_option("--scenario", plot_scenario, "Scenario file for comfort bands and action grid")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("", "usage", e.what());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*run) {
      heatrl::Scenario s = scenario_file.empty() ? heatrl::Scenario{} : heatrl::load_scenario(scenario_file);
      if (!agent.empty()) s.agent = heatrl::parse_agent_kind(agent);
      if (!price.empty()) s.tariff = heatrl::parse_tariff_kind(price);
      if (days > 0) s.days = days;
      if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
      print_report(heatrl::run_scenario(s, out_dir));
    } else if (*suite) {
      const auto cfg = heatrl::load_suite(suite_file);
      const auto rows = heatrl::run_suite(cfg, suite_out);
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.ok ? 0 : 1;
      nlohmann::json out{{"status", failed ? "partial" : "ok"},
                         {"rows", rows.size()},
                         {"failed", failed},
                         {"table", (std::filesystem::path(suite_out) / "suite_table.csv").string()}};
      std::cout << out.dump() << '\n';
      return failed ? 3 : 0;
    } else if (*plot) {
      const heatrl::Scenario s = plot_scenario.empty() ? heatrl::Scenario{} : heatrl::load_scenario(plot_scenario);
      const auto path = heatrl::emit_plot_data(heatrl::parse_plot_kind(plot_kind), plot_log, plot_out, s);
      std::cout << nlohmann::json{{"status", "ok"}, {"output", path.string()}}.dump() << '\n';
    }
  } catch (const heatrl::ConfigError& e) {
    print_error(command, "config", e.what());
    return 1;
  } catch (const heatrl::ParseError& e) {
    print_error(command, "parse", e.what());
    return 1;
  } catch (const heatrl::DomainError& e) {
    print_error(command, "domain", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(command, "runtime", e.what());
    return 1;
  }
  return 0;
}
