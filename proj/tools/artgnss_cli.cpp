// Command-line front end: simulate, estimate, sweep, report, plus helpers
// for inspecting a scenario's sky and dumping the default scenario.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "artgnss/csv_io.hpp"
#include "artgnss/error.hpp"
#include "artgnss/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;

artgnss::ScenarioAsset scenario_from(const std::string& path) {
  return path.empty() ? artgnss::default_scenario() : artgnss::load_scenario(path);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace artgnss;
  CLI::App app{"Articulated-truck GNSS simulator and estimator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::uint64_t seed = 1;
  double mask = 10.0;
  std::string out_dir = "out";
  auto* sim = app.add_subcommand("simulate", "Scenario -> observations.csv + truth.csv");
  sim->add_option("--scenario", scenario_path, "Scenario YAML (default: built-in)");
  sim->add_option("--seed", seed, "Noise/ambiguity seed");
  sim->add_option("--mask", mask, "Elevation mask, deg")->check(CLI::Range(0.0, 89.999));
  sim->add_option("--out", out_dir, "Output directory");

  std::string obs_path, series_path = "series.csv", estimator = "proposed", rtk_diag_path, report_path;
  bool serial = false;
  auto* est = app.add_subcommand("estimate", "Observations -> truck series CSV");
  est->add_option("--scenario", scenario_path, "Scenario YAML providing orbits, geometry and settings");
  est->add_option("--obs", obs_path, "Observation CSV")->required();
  est->add_option("--estimator", estimator, "proposed | rtk-only");
  est->add_option("--out", series_path, "Series CSV to write");
  est->add_option("--rtk-diagnostics", rtk_diag_path, "Per-epoch RTK diagnostics CSV");
  est->add_option("--solve-report", report_path, "Optimizer report CSV (proposed only)");
  est->add_flag("--serial", serial, "Use the serial reference kernels");

  std::string config_path;
  auto* sweep = app.add_subcommand("sweep", "Elevation-mask sweep over seeds and estimators");
  sweep->add_option("--config", config_path, "Experiment config YAML (default: built-in)");
  sweep->add_option("--out", out_dir, "Output directory (overrides config)");
  sweep->add_flag("--serial", serial, "Run cells sequentially");

  std::string truth_path, metrics_path;
  auto* report = app.add_subcommand("report", "Series + truth -> metrics");
  report->add_option("--series", series_path, "Series CSV")->required();
  report->add_option("--truth", truth_path, "Truth CSV")->required();
  report->add_option("--estimator", estimator, "Label for the metrics row");
  report->add_option("--mask", mask, "Mask label for the metrics row");
  report->add_option("--errors", metrics_path, "Per-epoch error CSV to write");

  double duration_override = 0.0;
  auto* sky = app.add_subcommand("sky", "Average visible satellite counts per mask");
  sky->add_option("--scenario", scenario_path, "Scenario YAML");
  std::vector<double> sky_masks{10.0, 35.0, 45.0};
  sky->add_option("--masks", sky_masks, "Masks, deg");
  sky->add_option("--duration", duration_override, "Averaging window, s (default: scenario duration)");

  std::string dump_path;
  auto* dump = app.add_subcommand("dump-scenario", "Write a scenario (default or loaded) as YAML");
  dump->add_option("--scenario", scenario_path, "Scenario YAML to normalize");
  dump->add_option("--out", dump_path, "Output path (default: stdout)");
  bool expand_orbits = false;
  dump->add_flag("--expand-orbits", expand_orbits, "Write the generated orbit table explicitly");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) {
      const ScenarioAsset asset = scenario_from(scenario_path);
      const SimulatedRun run = simulate_scenario(asset, seed, mask);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path d(out_dir);
      csv::write_file((d / "observations.csv").string(), csv::observations_to_string(run.observations));
      csv::write_file((d / "truth.csv").string(), csv::truth_to_string(truth_points(run.truth, asset.geometry)));
      std::cout << "wrote " << run.observations.size() << " observations over " << run.times.size() << " epochs to "
                << out_dir << "\n";
    } else if (*est) {
      const ScenarioAsset asset = scenario_from(scenario_path);
      const Estimator which = parse_estimator(estimator);
      const auto obs = csv::parse_observations(csv::read_file(obs_path));
      EstimateResult r;
      try {
        r = run_estimator(which, obs, asset, !serial);
      } catch (const Error& e) {
        std::cerr << "estimation failed: " << e.what() << "\n";
        return kExitEstimation;
      }
      csv::write_file(series_path, csv::series_to_string(r.series));
      if (!rtk_diag_path.empty()) csv::write_file(rtk_diag_path, csv::rtk_diagnostics_to_string(r.solutions));
      if (r.report) {
        std::cout << csv::solve_report_summary(*r.report);
        if (!report_path.empty()) csv::write_file(report_path, csv::solve_report_to_string(*r.report));
      }
      std::cout << "wrote " << r.series.size() << " epochs to " << series_path << "\n";
    } else if (*sweep) {
      LoadedConfig cfg = config_path.empty() ? LoadedConfig{ExperimentConfig{}, default_scenario()}
                                             : load_experiment_config(config_path);
      if (sweep->count("--out")) cfg.config.output_dir = out_dir;
      if (serial) cfg.config.parallel = false;
      const SweepResult res = run_mask_sweep(cfg.config, cfg.scenario);
      write_sweep_outputs(res, cfg.config.output_dir);
      std::cout << csv::read_file((std::filesystem::path(cfg.config.output_dir) / "metrics.csv").string());
      if (res.any_failed()) {
        std::cerr << "some sweep cells failed; see failures.csv\n";
        return kExitEstimation;
      }
    } else if (*report) {
      const auto series = csv::parse_series(csv::read_file(series_path));
      const auto truth = csv::parse_truth(csv::read_file(truth_path));
      MetricsReport m = evaluate(series, truth);
      std::cout << csv::kMetricsHeader << "\n"
                << estimator << ',' << mask << ',' << csv::format(m.pos_rms) << ',' << csv::format(m.angle_rms) << ','
                << csv::format(m.fix_rate) << "\n";
      if (!metrics_path.empty()) csv::write_file(metrics_path, csv::errors_to_string(m.errors));
    } else if (*sky) {
      const ScenarioAsset asset = scenario_from(scenario_path);
      const auto orbits = asset.constellation();
      const double window = duration_override > 0.0 ? duration_override : asset.duration;
      std::cout << "mask_deg,avg_visible\n";
      for (double m : sky_masks)
        std::cout << m << ',' << average_visible_count(orbits, asset.site, window, asset.rate_hz, m) << "\n";
    } else if (*dump) {
      ScenarioAsset asset = scenario_from(scenario_path);
      if (expand_orbits) asset.orbits = asset.constellation();
      const std::string text = dump_scenario(asset);
      if (dump_path.empty())
        std::cout << text;
      else
        csv::write_file(dump_path, text);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::InvalidArgument:
      case ErrorCode::InvalidPath: return kExitConfig;
      case ErrorCode::IoError: return kExitIo;
      default: return kExitEstimation;
    }
  }
  return kExitOk;
}
