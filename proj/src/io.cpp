#include "fnm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fnm {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_series_csv(std::ostream& out, const DistanceSeries& series) {
  out << "t,value,sigma\n";
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const double sigma = k < series.sigma.size() ? series.sigma[k] : 0.0;
    out << format_double(series.times[k]) << ',' << format_double(series.values[k]) << ',' << format_double(sigma)
        << '\n';
  }
}

void write_timing_csv(std::ostream& out, const TimingTable& table) {
  out << "method,L,n_traj,seconds,peak_bytes\n";
  for (const auto& r : table.rows)
    out << to_string(r.method) << ',' << r.L << ',' << r.n_traj << ',' << format_double(r.seconds) << ','
        << r.peak_bytes << '\n';
}

void write_gnuplot(std::ostream& out, const TimingTable& table) {
  out << "# dense: L seconds log2_seconds\n";
  for (const auto& r : table.of(Method::Dense))
    out << r.L << ' ' << format_double(r.seconds) << ' ' << format_double(std::log2(r.seconds)) << '\n';
  out << "\n\n# gaussian: L seconds ln_L ln_seconds\n";
  for (const auto& r : table.of(Method::Gaussian))
    out << r.L << ' ' << format_double(r.seconds) << ' ' << format_double(std::log(r.L)) << ' '
        << format_double(std::log(r.seconds)) << '\n';
  out << "\n\n# comparison: L gaussian_seconds dense_seconds\n";
  for (const auto& g : table.of(Method::Gaussian)) {
    for (const auto& d : table.of(Method::Dense)) {
      if (d.L == g.L) out << g.L << ' ' << format_double(g.seconds) << ' ' << format_double(d.seconds) << '\n';
    }
  }
}

nlohmann::json to_json(const MeasureResult& r) {
  nlohmann::json candidates = nlohmann::json::array();
  for (std::size_t k = 0; k < r.labels.size(); ++k)
    candidates.push_back({{"label", r.labels[k]}, {"value", r.candidate_values[k]}, {"sigma", r.candidate_sigma[k]}});
  return {{"measure", r.measure},
          {"method", r.method},
          {"value", r.value},
          {"sigma", r.sigma},
          {"argmax_pair", r.labels.empty() ? "" : r.argmax_label()},
          {"candidates", candidates},
          {"n_traj", r.n_traj},
          {"seed", r.seed}};
}

nlohmann::json to_json(const ScalingFit& fit) {
  return {{"model", to_string(fit.model)},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r2", fit.r2},
          {"rows_used", fit.rows_used}};
}

nlohmann::json to_json(const CrossoverReport& report) {
  nlohmann::json j = {{"found", report.found}, {"overlap", report.overlap}, {"summary", report.summary}};
  j["L_star"] = report.found ? nlohmann::json(report.L_star) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const TimingTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"method", to_string(r.method)},
                    {"L", r.L},
                    {"n_traj", r.n_traj},
                    {"seconds", r.seconds},
                    {"peak_bytes", r.peak_bytes}});
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fnm
