#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fnm/bench.hpp"
#include "fnm/lattice.hpp"
#include "fnm/trajectory.hpp"

namespace fnm {

enum class Subcommand { Simulate, Blp, Lfs, Validate, Bench };

Subcommand parse_subcommand(std::string_view name);
std::string to_string(Subcommand command);

struct BenchSettings {
  std::vector<int> gaussian_L{2, 3, 4, 5, 6, 16, 32, 64, 128};
  std::vector<int> dense_L{2, 3, 4, 5, 6};
  int n_traj = 32;
  double t_max = 0.4;
  int sample_stride = 10;
  /// Trajectory counts for the measure-pipeline scaling run; empty skips it.
  std::vector<int> ntr_grid{16, 32, 64, 128};
  int ntr_L = 32;
  /// Rows below these sizes are excluded from the scaling fits.
  int gaussian_fit_min_L = 16;
  int dense_fit_min_L = 3;
  double fit_min_seconds = 0.0;
  bool gnuplot = false;
};

struct RunConfig {
  Subcommand command = Subcommand::Blp;
  ModelParams model;
  BathFilling bath = BathFilling::Empty;
  ScheduleConfig schedule;
  std::vector<std::string> catalog{"neel", "domain_wall"};
  std::vector<std::string> preparations{"bell"};
  Method method = Method::Gaussian;
  std::string out = "fnm-output";
  bool log_i2 = false;
  double deadband = 0.0;
  int threads = 1;
  int bootstrap = 200;
  bool snapshots = false;
  BenchSettings bench;
  /// Non-empty when --help was requested; nothing else is meaningful then.
  std::string help;
};

/// Flat configuration keys accepted in files and as --key flags.
const std::vector<std::string>& config_keys();

/// Reads `key = value` lines ('#' starts a comment). A JSON document is also
/// accepted; its "config" object (as written to result.json) or top-level
/// object supplies the values.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies one key; throws Usage naming the key on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Range checks and the dense-size guard (Resource).
void validate(const RunConfig& config);

/// `args` excludes the program name; the first positional is the subcommand.
/// Precedence: flags, then the --config file, then defaults.
RunConfig parse_config(const std::vector<std::string>& args);

/// Every key with its effective value, typed.
nlohmann::json config_echo(const RunConfig& config);

/// Resolved output directory, prefixed by $FNM_OUT when `out` is relative.
std::string output_directory(const RunConfig& config);

}  // namespace fnm
