#include "fnm/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fnm/io.hpp"

namespace fnm {

namespace {

const std::vector<std::string> kBoolKeys = {"periodic", "log_i2", "snapshots", "bench_gnuplot"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why = {}) {
  throw Error(ErrorKind::Usage, "invalid value '" + value + "' for '" + key + "'" + (why.empty() ? "" : ": " + why));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (v.empty() || res.ec != std::errc() || res.ptr != end) bad_value(key, value);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) bad_value(key, value, "not finite");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : parse_list(value)) out.push_back(parse_number<int>(key, item));
  return out;
}

template <class F>
auto rethrow_as_usage(const std::string& key, const std::string& value, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    bad_value(key, value, e.what());
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string scalar_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number_float()) return format_double(j.get<double>());
  throw Error(ErrorKind::Usage, "unsupported JSON value " + j.dump());
}

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help = {
      {"L", "Sites per chain (default 2)"},
      {"t_par", "Hopping along the S and B chains (default 1)"},
      {"t_perp", "Rung coupling S_i - B_i (default 1)"},
      {"gamma", "Dephasing rate, 0 for a closed system (default 1)"},
      {"layout", "S, SB or SAB (default SB; SAB for lfs)"},
      {"dephase", "Dephased chain: auto, S or B (auto: B if present, else S)"},
      {"periodic", "Periodic boundary conditions"},
      {"b_init", "Initial B filling: empty, neel or full (default empty)"},
      {"dt", "Time step (default 0.02)"},
      {"t_max", "Total evolution time (default 10)"},
      {"n_traj", "Quantum trajectories per ensemble (default 500)"},
      {"sample_stride", "Record every k-th step (default 1)"},
      {"seed", "Master seed (default 20240611)"},
      {"catalog", "Comma list of BLP pairs: neel, domain_wall or p:q bit strings"},
      {"preparations", "Comma list of LFS preparations: bell, product"},
      {"method", "gaussian or dense (dense limited to L <= 6)"},
      {"out", "Output directory, below $FNM_OUT when relative"},
      {"log_i2", "Use -ln Tr rho^2 in the mutual information"},
      {"deadband", "Ignore increments at or below this value (default 0)"},
      {"threads", "Worker threads, 0 for all cores (default 1)"},
      {"bootstrap", "Bootstrap resamples, 0 disables error bars (default 200)"},
      {"snapshots", "simulate: also write snapshots.bin"},
      {"bench_gaussian_L", "bench: Gaussian system sizes"},
      {"bench_dense_L", "bench: dense system sizes"},
      {"bench_n_traj", "bench: trajectories per ensemble (default 32)"},
      {"bench_t_max", "bench: evolution time (default 0.4)"},
      {"bench_sample_stride", "bench: sample stride (default 10)"},
      {"bench_ntr_grid", "bench: trajectory counts for the pipeline scaling run"},
      {"bench_ntr_L", "bench: system size of the pipeline scaling run (default 32)"},
      {"bench_gaussian_fit_min_L", "bench: smallest L in the power-law fit (default 16)"},
      {"bench_dense_fit_min_L", "bench: smallest L in the exponential fit (default 3)"},
      {"bench_fit_min_seconds", "bench: drop rows faster than this from fits"},
      {"bench_gnuplot", "bench: also write timing_gnuplot.dat"}};
  return help;
}

bool is_bool_key(const std::string& key) {
  return std::find(kBoolKeys.begin(), kBoolKeys.end(), key) != kBoolKeys.end();
}

}  // namespace

Subcommand parse_subcommand(std::string_view name) {
  if (name == "simulate") return Subcommand::Simulate;
  if (name == "blp") return Subcommand::Blp;
  if (name == "lfs") return Subcommand::Lfs;
  if (name == "validate") return Subcommand::Validate;
  if (name == "bench") return Subcommand::Bench;
  throw Error(ErrorKind::Usage, "unknown subcommand '" + std::string(name) + "'");
}

std::string to_string(Subcommand command) {
  switch (command) {
    case Subcommand::Simulate: return "simulate";
    case Subcommand::Blp: return "blp";
    case Subcommand::Lfs: return "lfs";
    case Subcommand::Validate: return "validate";
    case Subcommand::Bench: return "bench";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "L", "t_par", "t_perp", "gamma", "layout", "dephase", "periodic", "b_init",
      "dt", "t_max", "n_traj", "sample_stride", "seed",
      "catalog", "preparations", "method", "out", "log_i2", "deadband", "threads", "bootstrap", "snapshots",
      "bench_gaussian_L", "bench_dense_L", "bench_n_traj", "bench_t_max", "bench_sample_stride", "bench_ntr_grid",
      "bench_ntr_L", "bench_gaussian_fit_min_L", "bench_dense_fit_min_L", "bench_fit_min_seconds", "bench_gnuplot"};
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  const std::string text = read_file(path);
  std::map<std::string, std::string> out;
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Usage, "cannot parse " + path + ": " + e.what());
    }
    const nlohmann::json& obj = j.contains("config") && j["config"].is_object() ? j["config"] : j;
    for (const auto& [key, value] : obj.items()) {
      if (value.is_array()) {
        std::vector<std::string> parts;
        for (const auto& v : value) parts.push_back(scalar_text(v));
        out[key] = join(parts);
      } else {
        out[key] = scalar_text(value);
      }
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage, path + ":" + std::to_string(number) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  auto& m = c.model;
  auto& s = c.schedule;
  auto& b = c.bench;
  if (key == "L") m.L = parse_number<int>(key, value);
  else if (key == "t_par") m.t_par = parse_number<double>(key, value);
  else if (key == "t_perp") m.t_perp = parse_number<double>(key, value);
  else if (key == "gamma") m.gamma = parse_number<double>(key, value);
  else if (key == "layout") m.layout = rethrow_as_usage(key, value, [&] { return parse_layout(trim(value)); });
  else if (key == "dephase") m.dephasing = rethrow_as_usage(key, value, [&] { return parse_dephasing(trim(value)); });
  else if (key == "periodic") m.periodic = parse_bool(key, value);
  else if (key == "b_init") c.bath = rethrow_as_usage(key, value, [&] { return parse_bath_filling(trim(value)); });
  else if (key == "dt") s.dt = parse_number<double>(key, value);
  else if (key == "t_max") s.t_max = parse_number<double>(key, value);
  else if (key == "n_traj") s.n_traj = parse_number<int>(key, value);
  else if (key == "sample_stride") s.sample_stride = parse_number<int>(key, value);
  else if (key == "seed") s.master_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "catalog") c.catalog = parse_list(value);
  else if (key == "preparations") c.preparations = parse_list(value);
  else if (key == "method") c.method = rethrow_as_usage(key, value, [&] { return parse_method(trim(value)); });
  else if (key == "out") c.out = trim(value);
  else if (key == "log_i2") c.log_i2 = parse_bool(key, value);
  else if (key == "deadband") c.deadband = parse_number<double>(key, value);
  else if (key == "threads") c.threads = parse_number<int>(key, value);
  else if (key == "bootstrap") c.bootstrap = parse_number<int>(key, value);
  else if (key == "snapshots") c.snapshots = parse_bool(key, value);
  else if (key == "bench_gaussian_L") b.gaussian_L = parse_int_list(key, value);
  else if (key == "bench_dense_L") b.dense_L = parse_int_list(key, value);
  else if (key == "bench_n_traj") b.n_traj = parse_number<int>(key, value);
  else if (key == "bench_t_max") b.t_max = parse_number<double>(key, value);
  else if (key == "bench_sample_stride") b.sample_stride = parse_number<int>(key, value);
  else if (key == "bench_ntr_grid") b.ntr_grid = parse_int_list(key, value);
  else if (key == "bench_ntr_L") b.ntr_L = parse_number<int>(key, value);
  else if (key == "bench_gaussian_fit_min_L") b.gaussian_fit_min_L = parse_number<int>(key, value);
  else if (key == "bench_dense_fit_min_L") b.dense_fit_min_L = parse_number<int>(key, value);
  else if (key == "bench_fit_min_seconds") b.fit_min_seconds = parse_number<double>(key, value);
  else if (key == "bench_gnuplot") b.gnuplot = parse_bool(key, value);
  else throw Error(ErrorKind::Usage, "unknown configuration key '" + key + "'");
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& key, const std::string& why) {
    if (!ok) throw Error(ErrorKind::Usage, "invalid value for '" + key + "': " + why);
  };
  const auto& m = c.model;
  const auto& s = c.schedule;
  const auto& b = c.bench;
  require(m.L >= 1 && m.L <= 256, "L", "must lie in [1, 256]");
  require(m.gamma >= 0.0, "gamma", "must be non-negative");
  require(s.dt > 0.0, "dt", "must be positive");
  require(s.t_max > 0.0, "t_max", "must be positive");
  require(s.t_max / s.dt <= 1e7, "t_max", "too many steps");
  require(s.n_traj >= 1, "n_traj", "must be at least 1");
  require(s.sample_stride >= 1, "sample_stride", "must be at least 1");
  require(c.deadband >= 0.0, "deadband", "must be non-negative");
  require(c.threads >= 0, "threads", "must be non-negative (0 uses all cores)");
  require(c.bootstrap >= 0 && c.bootstrap <= 100000, "bootstrap", "must lie in [0, 100000]");
  require(!c.out.empty(), "out", "must not be empty");
  if (c.command == Subcommand::Blp || c.command == Subcommand::Validate)
    require(!c.catalog.empty(), "catalog", "must name at least one pair");
  if (c.command == Subcommand::Lfs) require(!c.preparations.empty(), "preparations", "must name at least one preparation");
  auto positive_list = [&](const std::vector<int>& xs, const std::string& key) {
    for (int x : xs) require(x >= 1 && x <= 256, key, "entries must lie in [1, 256]");
  };
  positive_list(b.gaussian_L, "bench_gaussian_L");
  positive_list(b.dense_L, "bench_dense_L");
  for (int x : b.ntr_grid) require(x >= 1, "bench_ntr_grid", "entries must be positive");
  require(b.n_traj >= 1, "bench_n_traj", "must be at least 1");
  require(b.t_max > 0.0, "bench_t_max", "must be positive");
  require(b.sample_stride >= 1, "bench_sample_stride", "must be at least 1");
  require(b.ntr_L >= 1 && b.ntr_L <= 256, "bench_ntr_L", "must lie in [1, 256]");

  const bool dense_run = c.command == Subcommand::Validate ||
                         (c.method == Method::Dense && c.command != Subcommand::Bench);
  if (dense_run && m.L > kDenseMaxL)
    throw Error(ErrorKind::Resource, "dense method refused for L = " + std::to_string(m.L) + " (limit " +
                                         std::to_string(kDenseMaxL) + ")");
  if (c.command == Subcommand::Bench)
    for (int L : b.dense_L)
      if (L > kDenseMaxL)
        throw Error(ErrorKind::Resource, "dense method refused for L = " + std::to_string(L) + " in bench_dense_L");
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Non-Markovianity measures for dephasing free fermions", "fnm"};
  app.set_help_flag("-h,--help", "Print this help and exit");
  std::string command;
  std::string config_path;
  app.add_option("command", command, "simulate | blp | lfs | validate | bench")
      ->check(CLI::IsMember({"simulate", "blp", "lfs", "validate", "bench"}));
  app.add_option("--config", config_path, "Flat key = value file, or a result.json to rerun");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_keys()) {
    if (is_bool_key(key)) {
      options[key] = app.add_flag("--" + key, flag_values[key], key_help().at(key));
    } else {
      options[key] = app.add_option("--" + key, flag_values[key], key_help().at(key));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  RunConfig config;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    config.help = app.help();
    return config;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::Usage, e.what());
  }
  if (command.empty()) throw Error(ErrorKind::Usage, "missing subcommand (simulate | blp | lfs | validate | bench)");
  config.command = parse_subcommand(command);

  std::map<std::string, std::string> settings;
  if (!config_path.empty()) settings = read_config_file(config_path);
  for (const auto& [key, opt] : options)
    if (opt->count() > 0) settings[key] = is_bool_key(key) && flag_values[key].empty() ? "true" : flag_values[key];

  if (config.command == Subcommand::Lfs && !settings.count("layout")) config.model.layout = Layout::SAB;
  for (const auto& [key, value] : settings) apply_setting(config, key, value);
  validate(config);
  return config;
}

nlohmann::json config_echo(const RunConfig& c) {
  const auto& m = c.model;
  const auto& s = c.schedule;
  const auto& b = c.bench;
  return {{"L", m.L},
          {"t_par", m.t_par},
          {"t_perp", m.t_perp},
          {"gamma", m.gamma},
          {"layout", to_string(m.layout)},
          {"dephase", to_string(m.dephasing)},
          {"periodic", m.periodic},
          {"b_init", to_string(c.bath)},
          {"dt", s.dt},
          {"t_max", s.t_max},
          {"n_traj", s.n_traj},
          {"sample_stride", s.sample_stride},
          {"seed", s.master_seed},
          {"catalog", c.catalog},
          {"preparations", c.preparations},
          {"method", to_string(c.method)},
          {"out", c.out},
          {"log_i2", c.log_i2},
          {"deadband", c.deadband},
          {"threads", c.threads},
          {"bootstrap", c.bootstrap},
          {"snapshots", c.snapshots},
          {"bench_gaussian_L", b.gaussian_L},
          {"bench_dense_L", b.dense_L},
          {"bench_n_traj", b.n_traj},
          {"bench_t_max", b.t_max},
          {"bench_sample_stride", b.sample_stride},
          {"bench_ntr_grid", b.ntr_grid},
          {"bench_ntr_L", b.ntr_L},
          {"bench_gaussian_fit_min_L", b.gaussian_fit_min_L},
          {"bench_dense_fit_min_L", b.dense_fit_min_L},
          {"bench_fit_min_seconds", b.fit_min_seconds},
          {"bench_gnuplot", b.gnuplot}};
}

std::string output_directory(const RunConfig& config) {
  const std::filesystem::path out(config.out);
  if (out.is_absolute()) return out.string();
  if (const char* root = std::getenv("FNM_OUT"); root && *root) return (std::filesystem::path(root) / out).string();
  return out.string();
}

}  // namespace fnm
