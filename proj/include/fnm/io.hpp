#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "fnm/bench.hpp"
#include "fnm/measures.hpp"

namespace fnm {

/// Shortest text that round-trips the double exactly.
std::string format_double(double x);

/// Columns t,value,sigma.
void write_series_csv(std::ostream& out, const DistanceSeries& series);

/// Columns method,L,n_traj,seconds,peak_bytes.
void write_timing_csv(std::ostream& out, const TimingTable& table);

/// Whitespace-separated blocks for the exponential panel (L, dense seconds),
/// the power-law panel (L, gaussian seconds) and the side-by-side comparison.
void write_gnuplot(std::ostream& out, const TimingTable& table);

nlohmann::json to_json(const MeasureResult& result);
nlohmann::json to_json(const ScalingFit& fit);
nlohmann::json to_json(const CrossoverReport& report);
nlohmann::json to_json(const TimingTable& table);

/// Writes through a temporary file and renames it; throws Io on failure.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace fnm
