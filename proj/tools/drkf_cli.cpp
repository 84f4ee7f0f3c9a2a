// Batch front door: scenario loading, Monte Carlo runs, condition checks
// and summary tables, with CSV and optional SVG output.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <drkf/conditions.hpp>
#include <drkf/config.hpp>
#include <drkf/sim.hpp>
#include <drkf/svg.hpp>

namespace {

using namespace drkf;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

struct CommonArgs {
  std::string scenario;
  std::string config_path;
  int table_case = 1;
  std::optional<std::string> filter;
  std::optional<int> window;
  std::optional<int> delta;
  std::optional<int> runs;
  std::optional<int> horizon;
  std::optional<std::uint64_t> seed;
  bool literal = false;
  bool respecting = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario,
                  "builtin scenario name (see `scenarios`)");
  cmd->add_option("--config", args.config_path, "scenario JSON file");
  cmd->add_option("--case", args.table_case,
                  "variant of the example1 preset (1-5)")
      ->check(CLI::Range(1, 5));
  cmd->add_option("--filter", args.filter, "drkf | drkf-swf | ckf | crkf");
  cmd->add_option("--L", args.window, "sliding-window length");
  cmd->add_option("--delta", args.delta, "optimization interval");
  cmd->add_option("--runs", args.runs, "Monte Carlo runs");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--horizon", args.horizon, "number of steps");
  cmd->add_flag("--paper-literal", args.literal,
                "sample channel noise with the configured half-widths");
  cmd->add_flag("--bound-respecting", args.respecting,
                "derive channel noise from the bounds so envelopes hold");
}

Scenario resolve_scenario(const CommonArgs& args) {
  Scenario sc = [&]() {
    if (!args.config_path.empty()) return load_scenario_file(args.config_path);
    if (args.scenario.empty()) {
      throw std::invalid_argument("pass --scenario <name> or --config <file>");
    }
    if (args.scenario == "example1" && args.table_case != 1) {
      return example1_scenario(args.table_case);
    }
    return builtin_scenario(args.scenario);
  }();
  if (args.literal && args.respecting) {
    throw std::invalid_argument(
        "--paper-literal and --bound-respecting are mutually exclusive");
  }
  ScenarioOverrides ov;
  ov.filter = args.filter;
  ov.window = args.window;
  ov.interval = args.delta;
  ov.runs = args.runs;
  ov.horizon = args.horizon;
  ov.seed = args.seed;
  if (args.literal) ov.channel_mode = ChannelMode::kPaperLiteral;
  if (args.respecting) ov.channel_mode = ChannelMode::kBoundRespecting;
  return apply_overrides(std::move(sc), ov);
}

std::string default_out_dir() {
  const char* env = std::getenv("DRKF_OUT_DIR");
  return env ? env : ".";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::vector<ChartSeries> metric_series(const RunStatistics& stats,
                                       bool bound_trace) {
  std::vector<ChartSeries> series;
  for (std::size_t e = 0; e < stats.estimator_labels.size(); ++e) {
    ChartSeries s;
    s.label = stats.estimator_labels[e] == 0
                  ? "centralized"
                  : "sensor " + std::to_string(stats.estimator_labels[e]);
    for (int k = 0; k <= stats.horizon; ++k) {
      s.x.push_back(k);
      s.y.push_back(bound_trace ? stats.trp[k][e] : stats.mse[k][e]);
    }
    series.push_back(std::move(s));
  }
  return series;
}

int cmd_run(const CommonArgs& args, const std::string& out_dir, bool svg) {
  const Scenario sc = resolve_scenario(args);
  const RunStatistics stats = run_monte_carlo(sc);

  std::filesystem::create_directories(out_dir);
  const std::string stem = sc.name + "_" + filter_kind_name(sc.filter);
  const std::filesystem::path csv_path =
      std::filesystem::path(out_dir) / (stem + ".csv");
  write_file(csv_path, stats.to_csv());
  std::printf("wrote %s\n", csv_path.string().c_str());
  if (svg) {
    const std::filesystem::path mse_path =
        std::filesystem::path(out_dir) / (stem + "_mse.svg");
    const std::filesystem::path trp_path =
        std::filesystem::path(out_dir) / (stem + "_trp.svg");
    write_file(mse_path, line_chart_svg(stem + ": MSE per sensor", "k", "MSE",
                                        metric_series(stats, false)));
    write_file(trp_path, line_chart_svg(stem + ": Tr(P) per sensor", "k",
                                        "Tr(P)", metric_series(stats, true)));
    std::printf("wrote %s\n", mse_path.string().c_str());
    std::printf("wrote %s\n", trp_path.string().c_str());
  }
  if (stats.swf_optimized + stats.swf_infeasible + stats.swf_iteration_limit >
      0) {
    std::printf(
        "window fusion: %ld optimized, %ld infeasible fallbacks, %ld "
        "iteration-limit fallbacks\n",
        stats.swf_optimized, stats.swf_infeasible, stats.swf_iteration_limit);
  }
  if (stats.channel_clip_events > 0) {
    std::printf("channel sampler clipped %ld draws into their bounds\n",
                stats.channel_clip_events);
  }
  std::printf("%s\n", stats.summary().c_str());
  return kExitOk;
}

int cmd_check(const CommonArgs& args, int nbar, double mu_floor) {
  const Scenario sc = resolve_scenario(args);
  if (nbar > sc.horizon) {
    throw std::invalid_argument("--nbar exceeds the scenario horizon");
  }
  const ObservabilityReport obs =
      check_observability(sc.model, sc.bounds, nbar, 0, sc.horizon - nbar);
  StructureOptions structure_opts;
  structure_opts.mu_floor = mu_floor;
  const StructureReport structure =
      check_structure(sc.model, sc.bounds, sc.horizon, structure_opts);
  std::fputs(obs.to_text().c_str(), stdout);
  std::fputs(structure.to_text().c_str(), stdout);
  return (obs.pass && structure.pass()) ? kExitOk : kExitCheckFailed;
}

int cmd_table2(std::uint64_t seed, int runs) {
  // Published reference values the preset variants are compared against.
  const double ref_mse[5] = {0.74, 0.75, 0.73, 0.89, 0.90};
  const double ref_p[5] = {4.15, 4.15, 4.16, 9.38, 9.38};
  std::printf("case  MSE_max  (ref)    P_max  (ref)\n");
  for (int variant = 1; variant <= 5; ++variant) {
    Scenario sc = example1_scenario(variant);
    sc.seed = seed;
    sc.runs = runs;
    const RunStatistics stats = run_monte_carlo(sc);
    std::printf("%4d  %7.3f  (%.2f)  %7.3f  (%.2f)\n", variant, stats.mse_max,
                ref_mse[variant - 1], stats.p_max, ref_p[variant - 1]);
  }
  return kExitOk;
}

int cmd_scenarios() {
  for (const std::string& name : builtin_scenario_names()) {
    std::printf("%s\n", name.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed robust Kalman filtering over corrupted channels"};
  app.require_subcommand(1);

  CommonArgs run_args, check_args;

  CLI::App* run_cmd = app.add_subcommand("run", "run a Monte Carlo suite");
  add_common_options(run_cmd, run_args);
  std::string out_dir = default_out_dir();
  bool svg = false;
  run_cmd->add_option("--out-dir", out_dir,
                      "output directory (default: $DRKF_OUT_DIR or .)");
  run_cmd->add_flag("--svg", svg, "also emit SVG line charts");

  CLI::App* check_cmd = app.add_subcommand(
      "check", "evaluate observability and noise-decay conditions");
  add_common_options(check_cmd, check_args);
  int nbar = 4;
  check_cmd->add_option("--nbar", nbar, "observability window length")
      ->check(CLI::NonNegativeNumber);
  double mu_floor = 1e-12;
  check_cmd->add_option(
      "--mu-floor", mu_floor,
      "multiplicative-noise level below which a step counts as inactive");

  CLI::App* table_cmd = app.add_subcommand(
      "table2", "summarize the five example1 variants against references");
  std::uint64_t table_seed = 1;
  int table_runs = 100;
  table_cmd->add_option("--seed", table_seed, "master seed");
  table_cmd->add_option("--runs", table_runs, "Monte Carlo runs")
      ->check(CLI::PositiveNumber);

  app.add_subcommand("scenarios", "list builtin scenario presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_args, out_dir, svg);
    if (check_cmd->parsed()) return cmd_check(check_args, nbar, mu_floor);
    if (table_cmd->parsed()) return cmd_table2(table_seed, table_runs);
    return cmd_scenarios();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
