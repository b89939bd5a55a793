#include "artgnss/obs_sim.hpp"

#include <cmath>

#include "artgnss/error.hpp"
#include "artgnss/random.hpp"

namespace artgnss {

double quantize(double meters) noexcept { return std::nearbyint(meters / kObservableQuantum) * kObservableQuantum; }

double default_wavelength() noexcept { return quantize(0.1903); }

ErrorBudget ErrorBudget::zero() {
  ErrorBudget b;
  b.carrier_phase_noise_std = 0.0;
  b.pseudorange_noise_std = 0.0;
  b.doppler_noise_std = 0.0;
  b.iono_zenith_delay = 0.0;
  b.tropo_zenith_delay = 0.0;
  b.receiver_clock_walk_std = 0.0;
  b.receiver_clock_bias_max = 0.0;
  b.satellite_clock_bias_max = 0.0;
  return b;
}

void ErrorBudget::validate() const {
  for (double v : {carrier_phase_noise_std, pseudorange_noise_std, doppler_noise_std, iono_zenith_delay,
                   tropo_zenith_delay, receiver_clock_walk_std, receiver_clock_bias_max, satellite_clock_bias_max}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "error budget terms must be >= 0");
  }
}

namespace {

std::uint64_t sat_key(const SatelliteId& s) {
  return (static_cast<std::uint64_t>(s.system) << 16) | static_cast<std::uint64_t>(s.index);
}

enum Channel : std::uint64_t { kPhase = 1, kCode = 2, kDoppler = 3, kClockWalk = 4, kClockBias = 5, kSatClock = 6, kAmbiguity = 7 };

}  // namespace

AmbiguityTable AmbiguityTable::random(std::uint64_t seed, int max_abs) {
  AmbiguityTable t;
  t.seed_ = seed;
  t.max_abs_ = max_abs;
  return t;
}

long AmbiguityTable::at(int receiver, const SatelliteId& sat, double t) const {
  long n = 0;
  if (seed_) {
    const auto span = static_cast<std::uint64_t>(2 * max_abs_ + 1);
    const std::uint64_t h = rng::hash({*seed_, kAmbiguity, static_cast<std::uint64_t>(receiver), sat_key(sat)});
    n = static_cast<long>(h % span) - max_abs_;
  }
  for (const Slip& s : slips_) {
    if (s.receiver == receiver && s.sat == sat && t >= s.t_slip) n += s.delta;
  }
  return n;
}

AmbiguityTable inject_cycle_slip(const AmbiguityTable& table, int receiver, const SatelliteId& sat, double t_slip,
                                 long delta) {
  if (delta == 0) throw Error(ErrorCode::InvalidArgument, "cycle slip delta must be nonzero");
  AmbiguityTable out = table;
  out.slips_.push_back({receiver, sat, t_slip, delta});
  return out;
}

double receiver_clock(const ErrorBudget& budget, int receiver, std::size_t epoch, double dt) {
  const auto rcv = static_cast<std::uint64_t>(receiver);
  double clock = budget.receiver_clock_bias_max *
                 (2.0 * rng::uniform(rng::hash({budget.seed, kClockBias, rcv})) - 1.0);
  const double step_std = kSpeedOfLight * budget.receiver_clock_walk_std * std::sqrt(dt);
  if (step_std > 0.0) {
    for (std::size_t k = 1; k <= epoch; ++k) clock += step_std * rng::normal(rng::hash({budget.seed, kClockWalk, rcv, k}));
  }
  return clock;
}

std::vector<GnssObservation> synthesize_epoch(const SkyView& sky, const Ephemeris& eph,
                                              std::span<const ReceiverTruth> receivers, const ErrorBudget& budget,
                                              const AmbiguityTable& ambiguities, std::size_t epoch, double t,
                                              double dt) {
  if (sky.empty()) throw Error(ErrorCode::InvalidArgument, "empty sky view");
  const double lambda = default_wavelength();
  const auto ep = static_cast<std::uint64_t>(epoch);

  std::vector<GnssObservation> out;
  out.reserve(receivers.size() * sky.size());
  for (const ReceiverTruth& rcv : receivers) {
    const double clock = quantize(receiver_clock(budget, rcv.receiver, epoch, dt));
    const double drift = epoch == 0 ? 0.0 : (receiver_clock(budget, rcv.receiver, epoch, dt) -
                                             receiver_clock(budget, rcv.receiver, epoch - 1, dt)) / dt;
    const auto rk = static_cast<std::uint64_t>(rcv.receiver);
    for (const VisibleSatellite& vis : sky) {
      const Ephemeris::LocalState sat = eph.state(vis.id, t);
      const Eigen::Vector3d los = sat.position - rcv.position;
      const double range = quantize(los.norm());
      const Eigen::Vector3d unit = los.normalized();
      const double range_rate = unit.dot(sat.velocity - rcv.velocity);

      const double sin_el = std::sin(vis.elevation * kDegToRad);
      const double obliquity = 1.0 / sin_el;
      const double inflation = budget.elevation_noise_inflation ? obliquity : 1.0;
      const std::uint64_t sk = sat_key(vis.id);

      // Terms shared by every receiver at this epoch.
      const double sat_clock = quantize(budget.satellite_clock_bias_max *
                                        (2.0 * rng::uniform(rng::hash({budget.seed, kSatClock, sk})) - 1.0));
      const double iono = quantize(budget.iono_zenith_delay * obliquity);
      const double tropo = quantize(budget.tropo_zenith_delay * obliquity);

      const double phase_noise = quantize(budget.carrier_phase_noise_std * inflation *
                                          rng::normal(rng::hash({budget.seed, kPhase, ep, rk, sk})));
      const double code_noise = quantize(budget.pseudorange_noise_std * inflation *
                                         rng::normal(rng::hash({budget.seed, kCode, ep, rk, sk})));
      const double doppler_noise = budget.doppler_noise_std * inflation *
                                   rng::normal(rng::hash({budget.seed, kDoppler, ep, rk, sk}));
      const double n_cycles = static_cast<double>(ambiguities.at(rcv.receiver, vis.id, t));

      GnssObservation obs;
      obs.receiver = rcv.receiver;
      obs.sat = vis.id;
      obs.t = t;
      obs.wavelength = lambda;
      obs.elevation = vis.elevation;
      // Phase = r + lambda N + (clock_r - clock_s) - I + T + noise
      obs.carrier_phase = range + lambda * n_cycles + clock - sat_clock - iono + tropo + phase_noise;
      obs.pseudorange = range + clock - sat_clock + iono + tropo + code_noise;
      obs.doppler_range_rate = range_rate + drift + doppler_noise;
      out.push_back(obs);
    }
  }
  return out;
}

}  // namespace artgnss
