#pragma once

#include <span>
#include <string>
#include <vector>

#include "artgnss/harness.hpp"

namespace artgnss::csv {

/// Shortest text that parses back to the same double.
std::string format(double v);

// Headers are fixed; readers check them and throw Error(IoError) on mismatch.
inline constexpr const char* kObservationHeader = "t,antenna,system,sat,phase_m,pr_m,dopp_mps,elev_deg,wavelength";
inline constexpr const char* kTruthHeader = "t,e,n,u,heading_f,heading_r,angle";
inline constexpr const char* kSeriesHeader = "t,e,n,u,angle,status_flags";
inline constexpr const char* kErrorsHeader = "t,pos_err_m,angle_err_deg";
inline constexpr const char* kMetricsHeader = "estimator,mask,pos_rms_m,angle_rms_deg,fix_rate";
inline constexpr const char* kRtkHeader = "t,pair,status,ratio,n_sats,baseline_e,baseline_n,baseline_u";

std::string observations_to_string(std::span<const GnssObservation> obs);
std::vector<GnssObservation> parse_observations(const std::string& text);

std::string truth_to_string(std::span<const TruthPoint> truth);
std::vector<TruthPoint> parse_truth(const std::string& text);

/// Missing position/angle fields are written as empty cells.
std::string series_to_string(const TruckSeries& series);
TruckSeries parse_series(const std::string& text);

std::string errors_to_string(std::span<const EpochError> errors);
std::string rtk_diagnostics_to_string(std::span<const EpochSolution> solutions);
std::string solve_report_to_string(const SolveReport& report);
std::string solve_report_summary(const SolveReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace artgnss::csv
