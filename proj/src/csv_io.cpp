#include "artgnss/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "artgnss/error.hpp"

namespace artgnss::csv {

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorCode::IoError, what); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) io_error("bad number '" + s + "'");
  return v;
}

/// Data rows after checking the header; tolerates CRLF and a trailing newline.
std::vector<std::vector<std::string>> rows(const std::string& text, const char* header, std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) io_error("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) io_error("unexpected CSV header '" + line + "', expected '" + header + "'");
  std::vector<std::vector<std::string>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != columns) io_error("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " fields");
    out.push_back(std::move(cells));
  }
  return out;
}

}  // namespace

std::string observations_to_string(std::span<const GnssObservation> obs) {
  std::string out = std::string(kObservationHeader) + "\n";
  for (const auto& o : obs) {
    out += format(o.t) + ',' + (o.receiver == kBaseReceiver ? std::string("BASE") : std::to_string(o.receiver)) + ',' +
           system_code(o.sat.system) + ',' + o.sat.str() + ',' + format(o.carrier_phase) + ',' +
           format(o.pseudorange) + ',' + format(o.doppler_range_rate) + ',' + format(o.elevation) + ',' +
           format(o.wavelength) + '\n';
  }
  return out;
}

std::vector<GnssObservation> parse_observations(const std::string& text) {
  std::vector<GnssObservation> out;
  for (const auto& c : rows(text, kObservationHeader, 9)) {
    GnssObservation o;
    o.t = to_double(c[0]);
    if (c[1] == "BASE") {
      o.receiver = kBaseReceiver;
    } else if (c[1].size() == 1 && c[1][0] >= '1' && c[1][0] <= '4') {
      o.receiver = c[1][0] - '0';
    } else {
      io_error("bad antenna id '" + c[1] + "'");
    }
    try {
      o.sat = parse_satellite_id(c[3]);
    } catch (const Error& e) {
      io_error(e.what());
    }
    if (c[2].size() != 1 || c[2][0] != system_code(o.sat.system)) io_error("system column disagrees with sat id");
    o.carrier_phase = to_double(c[4]);
    o.pseudorange = to_double(c[5]);
    o.doppler_range_rate = to_double(c[6]);
    o.elevation = to_double(c[7]);
    o.wavelength = to_double(c[8]);
    out.push_back(o);
  }
  return out;
}

std::string truth_to_string(std::span<const TruthPoint> truth) {
  std::string out = std::string(kTruthHeader) + "\n";
  for (const auto& p : truth) {
    out += format(p.t) + ',' + format(p.position.e) + ',' + format(p.position.n) + ',' + format(p.position.u) + ',' +
           format(p.front_heading) + ',' + format(p.rear_heading) + ',' + format(p.articulated_angle) + '\n';
  }
  return out;
}

std::vector<TruthPoint> parse_truth(const std::string& text) {
  std::vector<TruthPoint> out;
  for (const auto& c : rows(text, kTruthHeader, 7)) {
    TruthPoint p;
    p.t = to_double(c[0]);
    p.position = {to_double(c[1]), to_double(c[2]), to_double(c[3])};
    p.front_heading = to_double(c[4]);
    p.rear_heading = to_double(c[5]);
    p.articulated_angle = to_double(c[6]);
    out.push_back(p);
  }
  return out;
}

std::string series_to_string(const TruckSeries& series) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& p : series) {
    out += format(p.t) + ',';
    if (p.position)
      out += format(p.position->e) + ',' + format(p.position->n) + ',' + format(p.position->u) + ',';
    else
      out += ",,,";
    if (p.articulated_angle) out += format(*p.articulated_angle);
    out += ',' + p.status_flags + '\n';
  }
  return out;
}

TruckSeries parse_series(const std::string& text) {
  TruckSeries out;
  for (const auto& c : rows(text, kSeriesHeader, 6)) {
    SeriesPoint p;
    p.t = to_double(c[0]);
    if (!c[1].empty() || !c[2].empty() || !c[3].empty())
      p.position = EnuPoint{to_double(c[1]), to_double(c[2]), to_double(c[3])};
    if (!c[4].empty()) p.articulated_angle = to_double(c[4]);
    p.status_flags = c[5];
    out.push_back(std::move(p));
  }
  return out;
}

std::string errors_to_string(std::span<const EpochError> errors) {
  std::string out = std::string(kErrorsHeader) + "\n";
  for (const auto& e : errors) out += format(e.t) + ',' + format(e.pos_err) + ',' + format(e.angle_err) + '\n';
  return out;
}

std::string rtk_diagnostics_to_string(std::span<const EpochSolution> solutions) {
  std::string out = std::string(kRtkHeader) + "\n";
  auto row = [&out](double t, const std::string& pair, const RtkSolution& s) {
    out += format(t) + ',' + pair + ',' + to_string(s.status) + ',' + format(s.ratio) + ',' +
           std::to_string(s.n_sats) + ',' + format(s.baseline.x()) + ',' + format(s.baseline.y()) + ',' +
           format(s.baseline.z()) + '\n';
  };
  for (const auto& s : solutions) {
    for (int j = 0; j < 4; ++j) row(s.t, "B-" + std::to_string(j + 1), s.rtk[j]);
    for (std::size_t m = 0; m < kAntennaPairs.size(); ++m)
      row(s.t, std::to_string(kAntennaPairs[m].first) + "-" + std::to_string(kAntennaPairs[m].second),
          s.moving_base[m]);
  }
  return out;
}

std::string solve_report_to_string(const SolveReport& r) {
  std::string out = "key,value\n";
  out += "iterations," + std::to_string(r.iterations) + '\n';
  out += "rejected_steps," + std::to_string(r.rejected_steps) + '\n';
  out += "initial_objective," + format(r.initial_objective) + '\n';
  out += "final_objective," + format(r.final_objective) + '\n';
  out += std::string("converged,") + (r.converged ? "true" : "false") + '\n';
  out += "termination," + r.termination + '\n';
  for (std::size_t k = 0; k < kFactorKinds.size(); ++k) {
    out += std::string("count_") + to_string(kFactorKinds[k]) + ',' + std::to_string(r.factor_counts[k]) + '\n';
    out += std::string("rms_") + to_string(kFactorKinds[k]) + ',' + format(r.residual_rms[k]) + '\n';
  }
  return out;
}

std::string solve_report_summary(const SolveReport& r) {
  std::ostringstream s;
  s << "dogleg: " << r.iterations << " iterations (" << r.rejected_steps << " rejected), objective "
    << r.initial_objective << " -> " << r.final_objective << ", " << (r.converged ? "converged" : "not converged")
    << " (" << r.termination << ")\n";
  for (std::size_t k = 0; k < kFactorKinds.size(); ++k)
    s << "  " << to_string(kFactorKinds[k]) << ": " << r.factor_counts[k] << " factors, residual rms "
      << r.residual_rms[k] << '\n';
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error("cannot write " + path);
  out << contents;
  if (!out) io_error("write failed for " + path);
}

}  // namespace artgnss::csv
