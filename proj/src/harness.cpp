#include "artgnss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "artgnss/csv_io.hpp"
#include "artgnss/error.hpp"

namespace artgnss {

const char* to_string(Estimator e) noexcept { return e == Estimator::Proposed ? "proposed" : "rtk-only"; }

Estimator parse_estimator(const std::string& text) {
  if (text == "proposed" || text == "PROPOSED") return Estimator::Proposed;
  if (text == "rtk-only" || text == "rtk_only" || text == "RTK_ONLY") return Estimator::RtkOnly;
  throw Error(ErrorCode::ConfigError, "unknown estimator '" + text + "'");
}

std::string mask_label(double mask_deg) {
  if (mask_deg <= 10.0) return "open-sky";
  std::ostringstream s;
  s << "mask" << mask_deg;
  return s.str();
}

void ExperimentConfig::validate() const {
  if (masks.empty()) throw Error(ErrorCode::ConfigError, "config: at least one mask required");
  for (double m : masks)
    if (!(m >= 0.0 && m < 90.0)) throw Error(ErrorCode::ConfigError, "config: masks must lie in [0, 90)");
  if (seeds.empty()) throw Error(ErrorCode::ConfigError, "config: at least one seed required");
  if (estimators.empty()) throw Error(ErrorCode::ConfigError, "config: at least one estimator required");
}

LoadedConfig parse_experiment_config(const std::string& yaml_text, const std::string& base_dir) {
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::ConfigError, "config: " + what); };
  LoadedConfig out;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    fail(std::string("parse error: ") + e.what());
  }
  ExperimentConfig& c = out.config;
  YAML::Node overrides;
  if (root && !root.IsNull()) {
    if (!root.IsMap()) fail("top level must be a mapping");
    const std::set<std::string> allowed{"scenario", "masks", "seeds", "estimators", "output_dir", "parallel", "overrides"};
    try {
      for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail("unknown key '" + key + "'");
      }
      if (root["scenario"]) {
        std::filesystem::path p = root["scenario"].as<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        c.scenario_path = p.string();
      }
      if (root["masks"]) c.masks = root["masks"].as<std::vector<double>>();
      if (root["seeds"]) c.seeds = root["seeds"].as<std::vector<std::uint64_t>>();
      if (root["estimators"]) {
        c.estimators.clear();
        for (const auto& e : root["estimators"]) c.estimators.push_back(parse_estimator(e.as<std::string>()));
      }
      if (root["output_dir"]) c.output_dir = root["output_dir"].as<std::string>();
      if (root["parallel"]) c.parallel = root["parallel"].as<bool>();
      overrides = root["overrides"];
    } catch (const YAML::Exception& e) {
      fail(e.what());
    }
  }
  c.validate();

  out.scenario = c.scenario_path.empty() ? default_scenario() : load_scenario(c.scenario_path);
  if (overrides && !overrides.IsNull()) {
    if (!overrides.IsMap()) fail("overrides must be a mapping");
    YAML::Node merged = YAML::Load(dump_scenario(out.scenario));
    for (const auto& section : overrides) {
      const auto name = section.first.as<std::string>();
      if (name != "rtk" && name != "graph" && name != "optimizer" && name != "errors")
        fail("overrides may only touch rtk, graph, optimizer, errors (got '" + name + "')");
      if (!section.second.IsMap()) fail("override section '" + name + "' must be a mapping");
      for (const auto& kv : section.second) merged[name][kv.first.as<std::string>()] = kv.second;
    }
    YAML::Emitter em;
    em << merged;
    out.scenario = parse_scenario(em.c_str());
  }
  return out;
}

LoadedConfig load_experiment_config(const std::string& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigError, "cannot open config file " + path);
  }
  return parse_experiment_config(text, std::filesystem::path(path).parent_path().string());
}

namespace {

std::string antenna_flags(const EpochSolution& s) {
  std::string f(4, 'N');
  for (int j = 0; j < 4; ++j) f[j] = status_code(s.rtk[j].status);
  return f;
}

}  // namespace

EstimateResult run_rtk_only_baseline(std::span<const kernels::EpochObservations> epochs, const Ephemeris& eph,
                                     const Eigen::Vector3d& base_pos, const RtkSettings& settings, bool parallel) {
  EstimateResult out;
  out.solutions.resize(epochs.size());
  const auto n = static_cast<long>(epochs.size());
  auto solve = [&](long i) {
    EpochSolution& s = out.solutions[i];
    s.t = epochs[i].t;
    const auto& base = epochs[i].by_receiver[0];
    for (int j = 0; j < 4; ++j) s.rtk[j] = rtk_solve(epochs[i].by_receiver[j + 1], base, base_pos, base_pos, eph, settings);
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) solve(i);
  } else {
    for (long i = 0; i < n; ++i) solve(i);
  }

  out.series.reserve(epochs.size());
  for (const EpochSolution& s : out.solutions) {
    SeriesPoint p;
    p.t = s.t;
    p.status_flags = antenna_flags(s);
    AntennaSet a;
    bool all = true;
    for (int j = 0; j < 4; ++j) {
      all = all && s.rtk[j].status != FixStatus::None;
      a.positions[j] = base_pos + s.rtk[j].baseline;
    }
    if (s.rtk[0].status != FixStatus::None && s.rtk[1].status != FixStatus::None) p.position = truck_position(a);
    if (all) {
      try {
        p.articulated_angle = articulated_angle(a);
      } catch (const Error&) {
      }
    }
    out.series.push_back(std::move(p));
  }
  return out;
}

EstimateResult run_proposed(std::span<const kernels::EpochObservations> epochs, const Ephemeris& eph,
                            const Eigen::Vector3d& base_pos, const AntennaGeometry& geom, const RtkSettings& rtk,
                            const GraphSettings& graph_settings, const OptimizerSettings& optimizer, bool parallel) {
  EstimateResult out;
  out.solutions = parallel ? kernels::solve_epochs_parallel(epochs, eph, base_pos, rtk)
                           : kernels::solve_epochs_serial(epochs, eph, base_pos, rtk);
  const FactorGraph graph = build_graph(out.solutions, base_pos, geom, graph_settings);
  OptimizerSettings opt = optimizer;
  opt.parallel = opt.parallel && parallel;
  OptimizeResult res = optimize(graph, initial_states(out.solutions, base_pos), opt);

  std::vector<double> times;
  times.reserve(epochs.size());
  for (const auto& e : epochs) times.push_back(e.t);
  const auto truck = extract_truck_series(res.states, times);
  out.series.reserve(truck.size());
  for (std::size_t i = 0; i < truck.size(); ++i) {
    SeriesPoint p;
    p.t = truck[i].t;
    p.position = truck[i].position;
    p.articulated_angle = truck[i].articulated_angle;
    p.status_flags = antenna_flags(out.solutions[i]) + "/";
    for (const auto& mb : out.solutions[i].moving_base) p.status_flags += status_code(mb.status);
    out.series.push_back(std::move(p));
  }
  out.report = std::move(res.report);
  out.states = std::move(res.states);
  return out;
}

EstimateResult run_estimator(Estimator which, std::span<const GnssObservation> observations,
                             const ScenarioAsset& asset, bool parallel) {
  const auto epochs = kernels::group_by_epoch(observations);
  const Ephemeris eph = make_ephemeris(asset);
  if (which == Estimator::RtkOnly) return run_rtk_only_baseline(epochs, eph, asset.base_enu, asset.rtk, parallel);
  return run_proposed(epochs, eph, asset.base_enu, asset.geometry, asset.rtk, asset.graph, asset.optimizer, parallel);
}

std::vector<TruthPoint> truth_points(std::span<const TruckState> truth, const AntennaGeometry& geom) {
  std::vector<TruthPoint> out;
  out.reserve(truth.size());
  for (const auto& s : truth) {
    const AntennaSet a = antenna_positions(s, geom);
    out.push_back({s.t, truck_position(a), s.front_heading, s.rear_heading, articulated_angle(a)});
  }
  return out;
}

namespace {

double rms_of(std::span<const EpochError> errors, double EpochError::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : errors) {
    const double v = e.*field;
    if (std::isnan(v)) continue;
    sum += v * v;
    ++n;
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double rms_position(std::span<const EpochError> errors) { return rms_of(errors, &EpochError::pos_err); }
double rms_angle(std::span<const EpochError> errors) { return rms_of(errors, &EpochError::angle_err); }

MetricsReport evaluate(const TruckSeries& series, std::span<const TruthPoint> truth) {
  MetricsReport m;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::array<std::size_t, 4> fix_ant{};
  std::array<std::size_t, 6> fix_pair{};
  std::size_t with_pairs = 0;
  for (const SeriesPoint& p : series) {
    auto it = std::lower_bound(truth.begin(), truth.end(), p.t - 1e-9,
                               [](const TruthPoint& a, double t) { return a.t < t; });
    if (it == truth.end() || std::abs(it->t - p.t) > 1e-9) continue;
    ++m.epoch_count;
    EpochError e{p.t, nan, nan};
    if (p.position) {
      e.pos_err = (p.position->vec() - it->position.vec()).norm();
      ++m.pos_count;
    }
    if (p.articulated_angle) {
      e.angle_err = angle_diff_deg(*p.articulated_angle, it->articulated_angle);
      ++m.angle_count;
    }
    m.errors.push_back(e);
    for (std::size_t j = 0; j < 4 && j < p.status_flags.size(); ++j) fix_ant[j] += p.status_flags[j] == 'X';
    if (p.status_flags.size() >= 11 && p.status_flags[4] == '/') {
      ++with_pairs;
      for (std::size_t k = 0; k < 6; ++k) fix_pair[k] += p.status_flags[5 + k] == 'X';
    }
  }
  if (m.epoch_count == 0 || (m.pos_count == 0 && m.angle_count == 0))
    throw Error(ErrorCode::EmptyOverlap, "no epoch has both an estimate and a truth value");
  m.pos_rms = rms_position(m.errors);
  m.angle_rms = rms_angle(m.errors);
  double mean = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    m.fix_rate_antenna[j] = static_cast<double>(fix_ant[j]) / static_cast<double>(m.epoch_count);
    mean += m.fix_rate_antenna[j];
  }
  m.fix_rate = mean / 4.0;
  for (std::size_t k = 0; k < 6; ++k)
    m.fix_rate_pair[k] = with_pairs ? static_cast<double>(fix_pair[k]) / static_cast<double>(with_pairs) : 0.0;
  return m;
}

bool SweepResult::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.ok; });
}

SweepResult run_mask_sweep(const ExperimentConfig& config, const ScenarioAsset& asset) {
  config.validate();
  asset.validate();
  SweepResult result;
  for (double mask : config.masks)
    for (std::uint64_t seed : config.seeds)
      for (Estimator est : config.estimators) result.cells.push_back({mask, seed, est, false, {}, {}});

  const std::vector<TruthPoint> truth =
      truth_points(simulate_trajectory(asset.trajectory, asset.geometry, asset.rate_hz), asset.geometry);

  auto run_cell = [&](SweepCell& cell) {
    try {
      const SimulatedRun run = simulate_scenario(asset, cell.seed, cell.mask);
      const EstimateResult est = run_estimator(cell.estimator, run.observations, asset, false);
      cell.metrics = evaluate(est.series, truth);
      cell.metrics.estimator = to_string(cell.estimator);
      cell.metrics.mask = cell.mask;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };
  const auto n = static_cast<long>(result.cells.size());
  if (config.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) run_cell(result.cells[i]);
  } else {
    for (long i = 0; i < n; ++i) run_cell(result.cells[i]);
  }

  // Sequential reduction in a fixed order.
  for (Estimator est : config.estimators) {
    for (double mask : config.masks) {
      SweepRow row;
      row.estimator = est;
      row.mask = mask;
      std::vector<EpochError> pooled;
      double fix = 0.0;
      std::size_t ok = 0;
      for (const SweepCell& c : result.cells) {
        if (c.estimator != est || c.mask != mask) continue;
        if (!c.ok) {
          ++row.failed_cells;
          continue;
        }
        pooled.insert(pooled.end(), c.metrics.errors.begin(), c.metrics.errors.end());
        fix += c.metrics.fix_rate;
        ++ok;
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.pos_rms = ok ? rms_position(pooled) : nan;
      row.angle_rms = ok ? rms_angle(pooled) : nan;
      row.fix_rate = ok ? fix / static_cast<double>(ok) : nan;
      result.rows.push_back(row);
    }
  }
  return result;
}

namespace {

std::string mask_tag(double mask) {
  std::ostringstream s;
  s << mask;
  return s.str();
}

}  // namespace

void write_sweep_outputs(const SweepResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);

  // Rows pool every seed's per-epoch errors before taking the RMS.
  std::string metrics = std::string(csv::kMetricsHeader) + "\n";
  for (const SweepRow& r : result.rows)
    metrics += std::string(to_string(r.estimator)) + ',' + mask_tag(r.mask) + ',' + csv::format(r.pos_rms) + ',' +
               csv::format(r.angle_rms) + ',' + csv::format(r.fix_rate) + '\n';
  csv::write_file((d / "metrics.csv").string(), metrics);

  std::string by_seed = "estimator,mask,seed,pos_rms_m,angle_rms_deg,fix_rate,epochs,status\n";
  std::string failures = "estimator,mask,seed,error\n";
  for (const SweepCell& c : result.cells) {
    const std::string head = std::string(to_string(c.estimator)) + ',' + mask_tag(c.mask) + ',' + std::to_string(c.seed);
    if (c.ok) {
      by_seed += head + ',' + csv::format(c.metrics.pos_rms) + ',' + csv::format(c.metrics.angle_rms) + ',' +
                 csv::format(c.metrics.fix_rate) + ',' + std::to_string(c.metrics.epoch_count) + ",ok\n";
      csv::write_file((d / ("errors_" + std::string(to_string(c.estimator)) + "_mask" + mask_tag(c.mask) + "_seed" +
                            std::to_string(c.seed) + ".csv"))
                          .string(),
                      csv::errors_to_string(c.metrics.errors));
    } else {
      by_seed += head + ",nan,nan,nan,0,failed\n";
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures += head + ',' + msg + '\n';
    }
  }
  csv::write_file((d / "metrics_by_seed.csv").string(), by_seed);
  csv::write_file((d / "failures.csv").string(), failures);

  // Tables: one row per estimator, one column per mask.
  std::vector<double> masks;
  std::vector<Estimator> ests;
  for (const SweepRow& r : result.rows) {
    if (std::find(masks.begin(), masks.end(), r.mask) == masks.end()) masks.push_back(r.mask);
    if (std::find(ests.begin(), ests.end(), r.estimator) == ests.end()) ests.push_back(r.estimator);
  }
  for (auto [name, field] : {std::pair{"table_position.csv", &SweepRow::pos_rms},
                             std::pair{"table_angle.csv", &SweepRow::angle_rms}}) {
    std::string t = "estimator";
    for (double m : masks) t += ',' + mask_label(m);
    t += '\n';
    for (Estimator e : ests) {
      t += to_string(e);
      for (double m : masks) {
        for (const SweepRow& r : result.rows)
          if (r.estimator == e && r.mask == m) t += ',' + csv::format(r.*field);
      }
      t += '\n';
    }
    csv::write_file((d / name).string(), t);
  }
}

}  // namespace artgnss
