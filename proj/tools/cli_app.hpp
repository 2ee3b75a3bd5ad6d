#pragma once

// `ola` command-line driver. Kept in a header so the test suites can run
// subcommands in-process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ola/continuum.hpp"
#include "ola/discretesim.hpp"
#include "ola/format.hpp"
#include "ola/json_io.hpp"
#include "ola/units.hpp"
#include "ola/varthresh.hpp"

namespace ola::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kInfeasible = 3, kIoError = 4 };

using nlohmann::json;

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config-file failure already formatted with file and line.
class config_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  unsigned threads = 1;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedConfig {
  json doc = json::object();
  std::string text;
  std::string path;
};

// A manifest ({"subcommand", "config", ...}) is accepted in place of a config.
inline LoadedConfig load_config(const std::string& path, const std::string& subcommand) {
  LoadedConfig cfg;
  if (path.empty()) return cfg;
  cfg.path = path;
  cfg.text = read_file(path);
  try {
    cfg.doc = json::parse(cfg.text);
  } catch (const json::parse_error& e) {
    throw config_failure(path + ":" + format_int(line_of_offset(cfg.text, e.byte == 0 ? 0 : e.byte - 1)) +
                         ": malformed JSON: " + e.what());
  }
  if (!cfg.doc.is_object()) throw config_failure(path + ":1: config must be a JSON object");
  if (cfg.doc.contains("subcommand") && cfg.doc.contains("config")) {
    if (cfg.doc["subcommand"] != subcommand) {
      throw config_failure(path + ":1: manifest is for subcommand " + cfg.doc["subcommand"].dump());
    }
    cfg.doc = cfg.doc["config"];
  }
  return cfg;
}

inline std::string anchor(const LoadedConfig& cfg, const io::config_error& e) {
  if (cfg.path.empty()) return std::string("flags: ") + e.what();
  const auto pos = cfg.text.find("\"" + e.key() + "\"");
  const std::size_t line = pos == std::string::npos ? 1 : line_of_offset(cfg.text, pos);
  return cfg.path + ":" + format_int(line) + ": " + e.what();
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot write " + path);
  f << text;
  if (!f) throw io_error("write failed: " + path);
}

// Sidecar <out>.manifest.json. Holds no timestamps or thread counts, so a
// rerun from it reproduces identical bytes.
inline void write_manifest(const GlobalOptions& g, const std::string& subcommand, const json& resolved,
                           std::uint64_t seed) {
  if (g.out.empty()) return;
  json manifest{{"tool", "ola"},
                {"version", kToolVersion},
                {"subcommand", subcommand},
                {"seed", seed},
                {"config", resolved},
                {"outputs", json::array({g.out})}};
  std::ostringstream ss;
  ss << manifest.dump(2) << '\n';
  write_text(g.out + ".manifest.json", ss.str(), std::cout);
}

// "a:b:step" inclusive range or comma-separated list.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "' in grid " + spec);
    return v;
  };
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    const double start = to_double(spec.substr(0, a));
    const double stop = to_double(spec.substr(a + 1, b - a - 1));
    const double step = to_double(spec.substr(b + 1));
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

inline Epsilon parse_epsilon_flag(const std::string& s) {
  if (s == "inf" || s == "infinity") return Epsilon::unbounded();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad epsilon '" + s + "'");
  return Epsilon(v);
}

}  // namespace detail

// ---- subcommands -------------------------------------------------------------

struct RingsFlags {
  std::optional<int> levels;
  std::optional<std::string> epsilon;
  std::optional<std::string> preset;
  std::optional<double> decode_threshold, relay_power_density, source_power;
};

inline int cmd_rings(const GlobalOptions& g, const RingsFlags& f, std::ostream& out) {
  const auto cfg = detail::load_config(g.config, "rings");
  ContinuumParams params = ContinuumParams::fixed(1.0, 1.0, 3.0, Epsilon(1.2));
  int levels = 30;
  try {
    io::detail::check_keys(cfg.doc, "", {"params", "levels"});
    if (cfg.doc.contains("params")) params = io::parse_continuum_params(cfg.doc["params"], "params", params);
    levels = io::detail::get_int<int>(cfg.doc, "", "levels", levels);
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  if (f.preset) {
    if (*f.preset == "low") params.epsilon = {Epsilon(0.2)};
    else if (*f.preset == "moderate") params.epsilon = {Epsilon(0.43)};
    else if (*f.preset == "high") params.epsilon = {Epsilon(1.2)};
    else if (*f.preset == "basic") params.epsilon = {Epsilon::unbounded()};
    else throw std::invalid_argument("--preset must be low, moderate, high or basic");
  }
  if (f.epsilon) params.epsilon = {detail::parse_epsilon_flag(*f.epsilon)};
  if (f.decode_threshold) params.decode_threshold = *f.decode_threshold;
  if (f.relay_power_density) params.relay_power_density = *f.relay_power_density;
  if (f.source_power) params.source_power = *f.source_power;
  if (f.levels) levels = *f.levels;
  params.validate();
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");

  const RingSequence seq = propagate(params, levels);
  std::ostringstream csv;
  csv << "level,r_b,r_d\n";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    csv << (k + 1) << ',' << format_double(seq.rings[k].inner_radius()) << ','
        << format_double(seq.rings[k].outer_radius()) << '\n';
  }
  if (seq.died_at) csv << "died_at," << *seq.died_at << ",\n";
  detail::write_text(g.out, csv.str(), out);
  detail::write_manifest(g, "rings", json{{"params", io::to_json(params)}, {"levels", levels}}, 0);
  return kOk;
}

inline int cmd_mrtt(const GlobalOptions& g, const std::optional<std::string>& grid_flag, std::ostream& out,
                    std::ostream& err) {
  const auto cfg = detail::load_config(g.config, "mrtt");
  std::vector<double> grid = detail::parse_grid("0.05:2.15:0.05");
  try {
    io::detail::check_keys(cfg.doc, "", {"dr_grid"});
    grid = io::detail::get_doubles(cfg.doc, "", "dr_grid", grid);
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  if (grid_flag) grid = detail::parse_grid(*grid_flag);
  const MrttCurve curve = mrtt_curve(grid);
  for (double dr : curve.skipped) err << "warning: skipping infeasible DR " << format_double(dr) << '\n';
  std::ostringstream csv;
  csv << "dr,mrtt_db\n";
  for (const auto& p : curve.points) csv << format_double(p.decoding_ratio) << ',' << format_double(p.mrtt_db) << '\n';
  detail::write_text(g.out, csv.str(), out);
  detail::write_manifest(g, "mrtt", json{{"dr_grid", grid}}, 0);
  return kOk;
}

struct FesFlags {
  std::optional<std::string> dr_grid;
  std::optional<std::string> level_counts;
};

inline int cmd_fes(const GlobalOptions& g, const FesFlags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = detail::load_config(g.config, "fes");
  std::vector<double> grid = detail::parse_grid("0.05:2.15:0.05");
  std::vector<double> level_counts{1, 10, 50, 100};
  double decode_threshold = 1.0;
  double source_power = 3.0;
  double epsilon_factor = 1.0;
  try {
    io::detail::check_keys(cfg.doc, "", {"dr_grid", "level_counts", "decode_threshold", "source_power", "epsilon_factor"});
    grid = io::detail::get_doubles(cfg.doc, "", "dr_grid", grid);
    level_counts = io::detail::get_doubles(cfg.doc, "", "level_counts", level_counts);
    decode_threshold = io::detail::get_double(cfg.doc, "", "decode_threshold", decode_threshold);
    source_power = io::detail::get_double(cfg.doc, "", "source_power", source_power);
    epsilon_factor = io::detail::get_double(cfg.doc, "", "epsilon_factor", epsilon_factor);
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  if (f.dr_grid) grid = detail::parse_grid(*f.dr_grid);
  if (f.level_counts) level_counts = detail::parse_grid(*f.level_counts);
  if (!(epsilon_factor >= 1.0)) throw std::invalid_argument("epsilon_factor must be >= 1");

  std::ostringstream csv;
  csv << "dr,levels,fes\n";
  for (double dr : grid) {
    if (!(dr > 0.0) || !(dr < kBasicOlaMaxDecodingRatio)) {
      err << "warning: skipping infeasible DR " << format_double(dr) << '\n';
      continue;
    }
    const double pr = decode_threshold / dr;
    const ContinuumParams params = ContinuumParams::fixed(
        pr, decode_threshold, source_power, Epsilon(epsilon_min(decode_threshold, pr) * epsilon_factor));
    for (double l : level_counts) {
      const int levels = static_cast<int>(std::lround(l));
      csv << format_double(dr) << ',' << levels << ',' << format_double(fes(params, levels)) << '\n';
    }
  }
  detail::write_text(g.out, csv.str(), out);
  detail::write_manifest(g, "fes",
                         json{{"dr_grid", grid},
                              {"level_counts", level_counts},
                              {"decode_threshold", decode_threshold},
                              {"source_power", source_power},
                              {"epsilon_factor", epsilon_factor}},
                         0);
  return kOk;
}

inline int cmd_optimize(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = detail::load_config(g.config, "optimize");
  // Defaults: DR 0.9, P_s / P_r = 4.31 dB, Type 1 over 20 levels.
  ContinuumParams params = ContinuumParams::fixed(1.0 / 0.9, 1.0, 3.0, Epsilon::unbounded());
  varthresh::ConstraintSpec constraint = varthresh::ConstraintSpec::type1(20);
  varthresh::OptimizerConfig opt;
  try {
    io::detail::check_keys(cfg.doc, "", {"params", "constraint", "optimizer"});
    if (cfg.doc.contains("params")) params = io::parse_continuum_params(cfg.doc["params"], "params", params);
    if (cfg.doc.contains("constraint")) constraint = io::parse_constraint(cfg.doc["constraint"], "constraint");
    if (cfg.doc.contains("optimizer")) opt = io::parse_optimizer_config(cfg.doc["optimizer"], "optimizer");
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  if (g.seed) opt.rng_seed = *g.seed;
  opt.threads = g.threads;

  const varthresh::OptimizationResult result = varthresh::optimize(params, constraint, opt);
  detail::write_text(g.out, io::to_json(result).dump(2) + "\n", out);
  detail::write_manifest(g, "optimize",
                         json{{"params", io::to_json(params)},
                              {"constraint", io::to_json(constraint)},
                              {"optimizer", io::to_json(opt)}},
                         opt.rng_seed);
  return kOk;
}

inline int cmd_psb(const GlobalOptions& g, std::optional<std::size_t> trials_flag, std::ostream& out) {
  const auto cfg = detail::load_config(g.config, "psb");
  sim::TrialConfig trial;
  std::vector<double> rtt_grid = detail::parse_grid("0:3:0.25");
  std::vector<sim::SweepVariant> variants{{sim::VariantKind::density, 1.0},
                                          {sim::VariantKind::density, 2.0},
                                          {sim::VariantKind::density, 5.0},
                                          {sim::VariantKind::density, 10.0}};
  std::size_t trials = 400;
  try {
    io::detail::check_keys(cfg.doc, "", {"trial", "rtt_grid_db", "variants", "trials"});
    if (cfg.doc.contains("trial")) trial = io::parse_trial_config(cfg.doc["trial"], "trial");
    rtt_grid = io::detail::get_doubles(cfg.doc, "", "rtt_grid_db", rtt_grid);
    if (cfg.doc.contains("variants")) variants = io::parse_variants(cfg.doc["variants"], "variants");
    trials = io::detail::get_int<std::size_t>(cfg.doc, "", "trials", trials);
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  if (g.seed) trial.rng_seed = *g.seed;
  if (trials_flag) trials = *trials_flag;
  if (rtt_grid.empty()) throw std::invalid_argument("rtt_grid_db is empty");

  const auto cells = sim::psb_sweep(trial, rtt_grid, variants, trials, trial.rng_seed, g.threads);
  std::ostringstream csv;
  csv << "rtt_db,variant,psb,halfwidth,trials,seed\n";
  for (const auto& c : cells) {
    csv << format_double(c.rtt_db) << ',' << c.variant.label() << ',' << format_double(c.estimate.psb) << ','
        << format_double(c.estimate.wilson_halfwidth) << ',' << c.estimate.trials << ',' << c.seed << '\n';
  }
  detail::write_text(g.out, csv.str(), out);
  detail::write_manifest(g, "psb",
                         json{{"trial", io::to_json(trial)},
                              {"rtt_grid_db", rtt_grid},
                              {"variants", io::to_json(variants)},
                              {"trials", trials}},
                         trial.rng_seed);
  return kOk;
}

struct UnitsFlags {
  std::optional<double> tx_power_dbm, rx_sensitivity_dbm, density, wavelength_m, reference_distance_m;
  std::optional<double> gain_tx, gain_rx;
};

inline int cmd_units(const GlobalOptions& g, const UnitsFlags& f, std::ostream& out) {
  const auto cfg = detail::load_config(g.config, "units");
  std::optional<units::RadioParams> radio;
  try {
    io::detail::check_keys(cfg.doc, "", {"radio"});
    if (cfg.doc.contains("radio")) radio = io::parse_radio_params(cfg.doc["radio"], "radio");
  } catch (const io::config_error& e) {
    throw config_failure(detail::anchor(cfg, e));
  }
  const bool any_flag = f.tx_power_dbm || f.rx_sensitivity_dbm || f.density || f.wavelength_m ||
                        f.reference_distance_m || f.gain_tx || f.gain_rx;
  if (any_flag && !radio) radio = units::RadioParams{};
  if (radio) {
    if (f.tx_power_dbm) radio->tx_power_dbm = *f.tx_power_dbm;
    if (f.rx_sensitivity_dbm) radio->rx_sensitivity_dbm = *f.rx_sensitivity_dbm;
    if (f.density) radio->node_density_per_m2 = *f.density;
    if (f.wavelength_m) radio->wavelength_m = *f.wavelength_m;
    if (f.reference_distance_m) radio->reference_distance_m = *f.reference_distance_m;
    if (f.gain_tx) radio->antenna_gain_tx = *f.gain_tx;
    if (f.gain_rx) radio->antenna_gain_rx = *f.gain_rx;
    radio->validate();
  }

  std::ostringstream csv;
  csv << "example,tx_power_dbm,node_density_per_m2,rx_sensitivity_dbm,d_nn_m,dr_simplified,dr_general\n";
  auto row = [&](std::string_view label, const units::RadioParams& p) {
    csv << label << ',' << format_double(p.tx_power_dbm) << ',' << format_double(p.node_density_per_m2) << ','
        << format_double(p.rx_sensitivity_dbm) << ','
        << format_double(units::nearest_neighbor_distance(p.node_density_per_m2))
        << ','
        << format_double(units::decoding_ratio_simplified(p.tx_power_dbm, p.rx_sensitivity_dbm, p.node_density_per_m2))
        << ',' << format_double(units::decoding_ratio(p)) << '\n';
  };
  if (radio) {
    row("custom", *radio);
  } else {
    for (const auto& r : units::kTable1) row(r.label, units::radio_params(r));
  }
  detail::write_text(g.out, csv.str(), out);
  detail::write_manifest(g, "units", radio ? json{{"radio", io::to_json(*radio)}} : json::object(), 0);
  return kOk;
}

// ---- entry point -------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"OLA / OLA-T / OLA-VT broadcast analytics and Monte Carlo simulation", "ola"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master RNG seed")->group("Global");
  app.add_option("--out", g.out, "Output path (default: stdout)")->group("Global");
  app.add_option("--config", g.config, "JSON config or manifest")->group("Global");
  app.add_option("--threads", g.threads, "Worker threads, 0 = auto")->group("Global");
  app.fallthrough();

  RingsFlags rings_flags;
  auto* rings = app.add_subcommand("rings", "Ring radii per level (CSV level,r_b,r_d)");
  rings->add_option("--levels", rings_flags.levels, "Number of levels");
  rings->add_option("--epsilon", rings_flags.epsilon, "Threshold offset tau_b - tau_d, or inf");
  rings->add_option("--preset", rings_flags.preset, "low | moderate | high | basic");
  rings->add_option("--decode-threshold", rings_flags.decode_threshold);
  rings->add_option("--relay-power-density", rings_flags.relay_power_density);
  rings->add_option("--source-power", rings_flags.source_power);

  std::optional<std::string> mrtt_grid;
  auto* mrtt = app.add_subcommand("mrtt", "Minimum relative transmission threshold vs DR (CSV dr,mrtt_db)");
  mrtt->add_option("--dr-grid", mrtt_grid, "start:stop:step or comma list");

  FesFlags fes_flags;
  auto* fes_cmd = app.add_subcommand("fes", "Fraction of energy saved vs DR and levels (CSV dr,levels,fes)");
  fes_cmd->add_option("--dr-grid", fes_flags.dr_grid, "start:stop:step or comma list");
  fes_cmd->add_option("--levels", fes_flags.level_counts, "Level counts, comma list");

  auto* optimize_cmd = app.add_subcommand("optimize", "OLA-VT threshold schedule optimization (JSON)");

  std::optional<std::size_t> psb_trials;
  auto* psb = app.add_subcommand("psb", "Probability of successful broadcast sweep (CSV)");
  psb->add_option("--trials", psb_trials, "Trials per grid cell");

  UnitsFlags units_flags;
  auto* units_cmd = app.add_subcommand("units", "Decoding ratio from radio parameters (CSV)");
  units_cmd->add_option("--tx-power-dbm", units_flags.tx_power_dbm);
  units_cmd->add_option("--rx-sensitivity-dbm", units_flags.rx_sensitivity_dbm);
  units_cmd->add_option("--density", units_flags.density, "Nodes per m^2");
  units_cmd->add_option("--wavelength", units_flags.wavelength_m, "Metres");
  units_cmd->add_option("--reference-distance", units_flags.reference_distance_m, "Metres");
  units_cmd->add_option("--gain-tx", units_flags.gain_tx);
  units_cmd->add_option("--gain-rx", units_flags.gain_rx);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ola: " << e.what() << '\n';
    return kConfigError;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*rings) return cmd_rings(g, rings_flags, out);
    if (*mrtt) return cmd_mrtt(g, mrtt_grid, out, err);
    if (*fes_cmd) return cmd_fes(g, fes_flags, out, err);
    if (*optimize_cmd) return cmd_optimize(g, out);
    if (*psb) return cmd_psb(g, psb_trials, out);
    if (*units_cmd) return cmd_units(g, units_flags, out);
  } catch (const io_error& e) {
    err << "ola: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const config_failure& e) {
    err << "ola: " << e.what() << '\n';
    return kConfigError;
  } catch (const infeasible_model& e) {
    err << "ola: infeasible model: " << e.what() << '\n';
    return kInfeasible;
  } catch (const no_feasible_solution& e) {
    err << "ola: infeasible model: " << e.what() << '\n';
    return kInfeasible;
  } catch (const propagation_failure& e) {
    err << "ola: infeasible model: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "ola: config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace ola::cli
