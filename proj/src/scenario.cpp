#include "artgnss/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "artgnss/error.hpp"

namespace artgnss {

std::vector<OrbitSpec> ScenarioAsset::constellation() const {
  if (!orbits.empty()) return orbits;
  return build_constellation(constellation_seed, counts);
}

void ScenarioAsset::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, "scenario: " + what); };
  if (version != kScenarioVersion) fail("unsupported version " + std::to_string(version));
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("duration must be positive");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) fail("rate_hz must be positive");
  if (std::abs(trajectory.duration() - duration) > 1e-9) fail("trajectory segments must sum to the scenario duration");
  if (ambiguity_max_abs < 0) fail("ambiguity_max_abs must be >= 0");
  if (!(rtk.ratio_threshold >= 1.0)) fail("rtk.ratio_threshold must be >= 1");
  for (double s : {rtk.phase_sigma, rtk.code_sigma, rtk.doppler_sigma, graph.rtk_sigma, graph.moving_base_sigma,
                   graph.velocity_sigma, graph.baseline_sigma}) {
    if (!(s > 0.0)) fail("sigmas must be positive");
  }
  try {
    geometry.validate();
    errors.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

ScenarioAsset default_scenario() {
  ScenarioAsset a;
  a.trajectory.start = EnuPoint{200.0, -80.0, 0.0};
  a.trajectory.initial_heading = 90.0;
  a.trajectory.segments = {{4.0, 0.0}, {10.0, 20.0}, {12.0, -20.0}, {12.0, 20.0}, {12.0, -20.0}, {10.0, 0.0}};
  return a;
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, "scenario: " + what); }

template <class T>
void read(const YAML::Node& n, const char* key, T& out) {
  if (!n || !n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

Eigen::Vector3d vec3(const YAML::Node& n, const char* what) {
  if (!n.IsSequence() || n.size() != 3) config_error(std::string(what) + " must be a 3-element list");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

void read_vec3(const YAML::Node& n, const char* key, Eigen::Vector3d& out) {
  if (n && n[key]) out = vec3(n[key], key);
}

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!n) return;
  if (!n.IsMap()) config_error(where + " must be a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

void emit_vec3(YAML::Emitter& out, const Eigen::Vector3d& v) {
  out << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z() << YAML::EndSeq;
}

}  // namespace

ScenarioAsset parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("parse error: ") + e.what());
  }
  ScenarioAsset a = default_scenario();
  if (!root || root.IsNull()) return a;
  check_keys(root,
             {"version", "name", "site", "duration_s", "rate_hz", "base_enu", "constellation", "geometry",
              "trajectory", "errors", "ambiguity_max_abs", "rtk", "graph", "optimizer"},
             "scenario");
  try {
    read(root, "version", a.version);
    read(root, "name", a.name);
    if (const auto s = root["site"]) {
      check_keys(s, {"latitude_deg", "longitude_deg", "height_m"}, "site");
      read(s, "latitude_deg", a.site.latitude);
      read(s, "longitude_deg", a.site.longitude);
      read(s, "height_m", a.site.height);
    }
    read(root, "duration_s", a.duration);
    read(root, "rate_hz", a.rate_hz);
    read_vec3(root, "base_enu", a.base_enu);

    if (const auto c = root["constellation"]) {
      check_keys(c, {"seed", "counts", "orbits"}, "constellation");
      read(c, "seed", a.constellation_seed);
      if (const auto n = c["counts"]) {
        check_keys(n, {"gps", "beidou", "galileo", "qzss"}, "constellation.counts");
        read(n, "gps", a.counts.gps);
        read(n, "beidou", a.counts.beidou);
        read(n, "galileo", a.counts.galileo);
        read(n, "qzss", a.counts.qzss);
      }
      if (const auto o = c["orbits"]) {
        // Rows: [id, semi_major_axis_m, inclination_deg, raan_deg, phase_deg]
        for (const auto& row : o) {
          if (!row.IsSequence() || row.size() != 5) config_error("orbit rows need 5 columns");
          OrbitSpec spec;
          spec.id = parse_satellite_id(row[0].as<std::string>());
          spec.semi_major_axis = row[1].as<double>();
          spec.inclination = row[2].as<double>();
          spec.raan = row[3].as<double>();
          spec.phase_at_t0 = row[4].as<double>();
          if (!(spec.semi_major_axis > wgs84::kSemiMajorAxis)) config_error("orbit radius below the Earth surface");
          spec.angular_rate = kepler_rate(spec.semi_major_axis);
          a.orbits.push_back(spec);
        }
      }
    }

    if (const auto g = root["geometry"]) {
      check_keys(g, {"front_offsets", "rear_offsets", "front_axle_to_joint", "joint_to_rear_axle"}, "geometry");
      for (auto [key, arr] : {std::pair{"front_offsets", &a.geometry.front_offsets},
                              std::pair{"rear_offsets", &a.geometry.rear_offsets}}) {
        if (const auto n = g[key]) {
          if (!n.IsSequence() || n.size() != 2) config_error(std::string(key) + " needs two offsets");
          (*arr)[0] = vec3(n[0], key);
          (*arr)[1] = vec3(n[1], key);
        }
      }
      read(g, "front_axle_to_joint", a.geometry.front_axle_to_joint);
      read(g, "joint_to_rear_axle", a.geometry.joint_to_rear_axle);
    }

    if (const auto t = root["trajectory"]) {
      check_keys(t,
                 {"start_enu", "initial_heading_deg", "initial_articulation_deg", "speed_mps", "slew_rate_deg_s",
                  "max_articulation_deg", "segments"},
                 "trajectory");
      Eigen::Vector3d start = a.trajectory.start.vec();
      read_vec3(t, "start_enu", start);
      a.trajectory.start = EnuPoint::of(start);
      read(t, "initial_heading_deg", a.trajectory.initial_heading);
      read(t, "initial_articulation_deg", a.trajectory.initial_articulation);
      read(t, "speed_mps", a.trajectory.speed);
      read(t, "slew_rate_deg_s", a.trajectory.slew_rate);
      read(t, "max_articulation_deg", a.trajectory.max_articulation);
      if (const auto s = t["segments"]) {
        // Rows: [duration_s, target_articulation_deg]
        a.trajectory.segments.clear();
        for (const auto& row : s) {
          if (!row.IsSequence() || row.size() != 2) config_error("trajectory segments need 2 columns");
          a.trajectory.segments.push_back({row[0].as<double>(), row[1].as<double>()});
        }
      }
    }

    if (const auto e = root["errors"]) {
      check_keys(e,
                 {"carrier_phase_noise_std_m", "pseudorange_noise_std_m", "doppler_noise_std_mps",
                  "iono_zenith_delay_m", "tropo_zenith_delay_m", "receiver_clock_walk_std", "receiver_clock_bias_max_m",
                  "satellite_clock_bias_max_m", "elevation_noise_inflation"},
                 "errors");
      read(e, "carrier_phase_noise_std_m", a.errors.carrier_phase_noise_std);
      read(e, "pseudorange_noise_std_m", a.errors.pseudorange_noise_std);
      read(e, "doppler_noise_std_mps", a.errors.doppler_noise_std);
      read(e, "iono_zenith_delay_m", a.errors.iono_zenith_delay);
      read(e, "tropo_zenith_delay_m", a.errors.tropo_zenith_delay);
      read(e, "receiver_clock_walk_std", a.errors.receiver_clock_walk_std);
      read(e, "receiver_clock_bias_max_m", a.errors.receiver_clock_bias_max);
      read(e, "satellite_clock_bias_max_m", a.errors.satellite_clock_bias_max);
      read(e, "elevation_noise_inflation", a.errors.elevation_noise_inflation);
    }
    read(root, "ambiguity_max_abs", a.ambiguity_max_abs);

    if (const auto r = root["rtk"]) {
      check_keys(r,
                 {"ratio_threshold", "phase_sigma_m", "code_sigma_m", "doppler_sigma_mps", "max_iterations",
                  "convergence_m", "max_condition"},
                 "rtk");
      read(r, "ratio_threshold", a.rtk.ratio_threshold);
      read(r, "phase_sigma_m", a.rtk.phase_sigma);
      read(r, "code_sigma_m", a.rtk.code_sigma);
      read(r, "doppler_sigma_mps", a.rtk.doppler_sigma);
      read(r, "max_iterations", a.rtk.max_iterations);
      read(r, "convergence_m", a.rtk.convergence);
      read(r, "max_condition", a.rtk.max_condition);
    }
    if (const auto g = root["graph"]) {
      check_keys(g, {"rtk_sigma_m", "moving_base_sigma_m", "velocity_sigma_mps", "baseline_sigma_m", "summed_baseline_residual"},
                 "graph");
      read(g, "rtk_sigma_m", a.graph.rtk_sigma);
      read(g, "moving_base_sigma_m", a.graph.moving_base_sigma);
      read(g, "velocity_sigma_mps", a.graph.velocity_sigma);
      read(g, "baseline_sigma_m", a.graph.baseline_sigma);
      read(g, "summed_baseline_residual", a.graph.summed_baseline_residual);
    }
    if (const auto o = root["optimizer"]) {
      check_keys(o, {"max_iterations", "relative_tolerance", "gradient_tolerance", "initial_radius", "parallel"},
                 "optimizer");
      read(o, "max_iterations", a.optimizer.max_iterations);
      read(o, "relative_tolerance", a.optimizer.relative_tolerance);
      read(o, "gradient_tolerance", a.optimizer.gradient_tolerance);
      read(o, "initial_radius", a.optimizer.initial_radius);
      read(o, "parallel", a.optimizer.parallel);
    }
  } catch (const YAML::Exception& e) {
    config_error(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(e.what());
  }
  a.validate();
  return a;
}

ScenarioAsset load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const ScenarioAsset& a) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << a.version;
  out << YAML::Key << "name" << YAML::Value << a.name;
  out << YAML::Key << "site" << YAML::Value << YAML::BeginMap << YAML::Key << "latitude_deg" << YAML::Value
      << a.site.latitude << YAML::Key << "longitude_deg" << YAML::Value << a.site.longitude
      << YAML::Key << "height_m" << YAML::Value << a.site.height << YAML::EndMap;
  out << YAML::Key << "duration_s" << YAML::Value << a.duration;
  out << YAML::Key << "rate_hz" << YAML::Value << a.rate_hz;
  out << YAML::Key << "base_enu" << YAML::Value;
  emit_vec3(out, a.base_enu);

  out << YAML::Key << "constellation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << a.constellation_seed;
  out << YAML::Key << "counts" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "gps" << YAML::Value
      << a.counts.gps << YAML::Key << "beidou" << YAML::Value << a.counts.beidou << YAML::Key << "galileo"
      << YAML::Value << a.counts.galileo << YAML::Key << "qzss" << YAML::Value << a.counts.qzss << YAML::EndMap;
  if (!a.orbits.empty()) {
    out << YAML::Key << "orbits" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : a.orbits)
      out << YAML::Flow << YAML::BeginSeq << o.id.str() << o.semi_major_axis << o.inclination << o.raan
          << o.phase_at_t0 << YAML::EndSeq;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "front_offsets" << YAML::Value << YAML::BeginSeq;
  for (const auto& v : a.geometry.front_offsets) emit_vec3(out, v);
  out << YAML::EndSeq << YAML::Key << "rear_offsets" << YAML::Value << YAML::BeginSeq;
  for (const auto& v : a.geometry.rear_offsets) emit_vec3(out, v);
  out << YAML::EndSeq;
  out << YAML::Key << "front_axle_to_joint" << YAML::Value << a.geometry.front_axle_to_joint;
  out << YAML::Key << "joint_to_rear_axle" << YAML::Value << a.geometry.joint_to_rear_axle;
  out << YAML::EndMap;

  const auto& t = a.trajectory;
  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "start_enu" << YAML::Value;
  emit_vec3(out, t.start.vec());
  out << YAML::Key << "initial_heading_deg" << YAML::Value << t.initial_heading;
  out << YAML::Key << "initial_articulation_deg" << YAML::Value << t.initial_articulation;
  out << YAML::Key << "speed_mps" << YAML::Value << t.speed;
  out << YAML::Key << "slew_rate_deg_s" << YAML::Value << t.slew_rate;
  out << YAML::Key << "max_articulation_deg" << YAML::Value << t.max_articulation;
  out << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : t.segments) out << YAML::Flow << YAML::BeginSeq << s.duration << s.target_angle << YAML::EndSeq;
  out << YAML::EndSeq << YAML::EndMap;

  const auto& e = a.errors;
  out << YAML::Key << "errors" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "carrier_phase_noise_std_m" << YAML::Value << e.carrier_phase_noise_std;
  out << YAML::Key << "pseudorange_noise_std_m" << YAML::Value << e.pseudorange_noise_std;
  out << YAML::Key << "doppler_noise_std_mps" << YAML::Value << e.doppler_noise_std;
  out << YAML::Key << "iono_zenith_delay_m" << YAML::Value << e.iono_zenith_delay;
  out << YAML::Key << "tropo_zenith_delay_m" << YAML::Value << e.tropo_zenith_delay;
  out << YAML::Key << "receiver_clock_walk_std" << YAML::Value << e.receiver_clock_walk_std;
  out << YAML::Key << "receiver_clock_bias_max_m" << YAML::Value << e.receiver_clock_bias_max;
  out << YAML::Key << "satellite_clock_bias_max_m" << YAML::Value << e.satellite_clock_bias_max;
  out << YAML::Key << "elevation_noise_inflation" << YAML::Value << e.elevation_noise_inflation;
  out << YAML::EndMap;
  out << YAML::Key << "ambiguity_max_abs" << YAML::Value << a.ambiguity_max_abs;

  out << YAML::Key << "rtk" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ratio_threshold" << YAML::Value << a.rtk.ratio_threshold;
  out << YAML::Key << "phase_sigma_m" << YAML::Value << a.rtk.phase_sigma;
  out << YAML::Key << "code_sigma_m" << YAML::Value << a.rtk.code_sigma;
  out << YAML::Key << "doppler_sigma_mps" << YAML::Value << a.rtk.doppler_sigma;
  out << YAML::Key << "max_iterations" << YAML::Value << a.rtk.max_iterations;
  out << YAML::Key << "convergence_m" << YAML::Value << a.rtk.convergence;
  out << YAML::Key << "max_condition" << YAML::Value << a.rtk.max_condition;
  out << YAML::EndMap;

  out << YAML::Key << "graph" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rtk_sigma_m" << YAML::Value << a.graph.rtk_sigma;
  out << YAML::Key << "moving_base_sigma_m" << YAML::Value << a.graph.moving_base_sigma;
  out << YAML::Key << "velocity_sigma_mps" << YAML::Value << a.graph.velocity_sigma;
  out << YAML::Key << "baseline_sigma_m" << YAML::Value << a.graph.baseline_sigma;
  out << YAML::Key << "summed_baseline_residual" << YAML::Value << a.graph.summed_baseline_residual;
  out << YAML::EndMap;

  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_iterations" << YAML::Value << a.optimizer.max_iterations;
  out << YAML::Key << "relative_tolerance" << YAML::Value << a.optimizer.relative_tolerance;
  out << YAML::Key << "gradient_tolerance" << YAML::Value << a.optimizer.gradient_tolerance;
  out << YAML::Key << "initial_radius" << YAML::Value << a.optimizer.initial_radius;
  out << YAML::Key << "parallel" << YAML::Value << a.optimizer.parallel;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Ephemeris make_ephemeris(const ScenarioAsset& asset) { return Ephemeris(asset.constellation(), asset.site); }

SimulatedRun simulate_scenario(const ScenarioAsset& asset, std::uint64_t seed, double mask_deg) {
  asset.validate();
  if (!(mask_deg >= 0.0 && mask_deg < 90.0)) throw Error(ErrorCode::InvalidArgument, "mask must be in [0, 90)");
  SimulatedRun run;
  run.truth = simulate_trajectory(asset.trajectory, asset.geometry, asset.rate_hz);
  const std::size_t n = run.truth.size();
  const double dt = 1.0 / asset.rate_hz;

  const std::vector<OrbitSpec> orbits = asset.constellation();
  const Ephemeris eph(orbits, asset.site);
  const EcefPoint site = geodetic_to_ecef(asset.site);

  ErrorBudget budget = asset.errors;
  budget.seed = seed;
  const AmbiguityTable amb = AmbiguityTable::random(seed, asset.ambiguity_max_abs);

  run.times.resize(n);
  run.antennas.resize(n);
  run.visible_counts.resize(n);
  std::vector<std::vector<GnssObservation>> per_epoch(n);

#pragma omp parallel for schedule(static)
  for (long k = 0; k < static_cast<long>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const TruckState& s = run.truth[i];
    run.times[i] = s.t;
    run.antennas[i] = antenna_positions(s, asset.geometry, i);
    const auto vel = antenna_velocities(s, asset.geometry);
    std::array<ReceiverTruth, 5> receivers;
    receivers[0] = {kBaseReceiver, asset.base_enu, Eigen::Vector3d::Zero()};
    for (int j = 0; j < 4; ++j) receivers[j + 1] = {j + 1, run.antennas[i].positions[j], vel[j]};
    const SkyView sky = visible_sky(orbits, s.t, site, asset.site, mask_deg);
    run.visible_counts[i] = sky.size();
    if (!sky.empty()) per_epoch[i] = synthesize_epoch(sky, eph, receivers, budget, amb, i, s.t, dt);
  }
  for (auto& e : per_epoch) run.observations.insert(run.observations.end(), e.begin(), e.end());
  return run;
}

}  // namespace artgnss
