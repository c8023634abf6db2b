#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scdm/channel.hpp"
#include "scdm/constellation.hpp"
#include "scdm/csv.hpp"
#include "scdm/errors.hpp"
#include "scdm/metrics.hpp"
#include "scdm/parallel.hpp"
#include "scdm/pc_sampler.hpp"
#include "scdm/rng.hpp"
#include "scdm/score_net.hpp"
#include "scdm/score_oracle.hpp"

namespace scdm {

struct ExperimentConfig {
  int order = 64;  // M
  double sigma_min = 0.01;
  double sigma_max = 10.0;
  int levels = 64;  // N
  int L = 2;
  double r = 0.16;
  bool denoise_final = true;
  int symbols = 128;  // n, channel uses per sequence
  double snr_min = -18.0;
  double snr_max = 18.0;
  double snr_step = 3.0;
  int trials = 80;  // sequences per SNR point
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double vp_beta = 0.1;
  std::vector<std::string> modes{"raw", "oracle_pc", "mmse"};
  std::string output;
  std::string checkpoint;

  NoiseSchedule schedule() const { return NoiseSchedule(sigma_min, sigma_max, levels); }
  SamplerConfig sampler() const { return SamplerConfig{L, r, schedule(), denoise_final}; }

  std::vector<double> snr_grid() const {
    if (!(snr_step > 0.0)) throw ConfigError("snr_step must be > 0");
    std::vector<double> grid;
    const int count = static_cast<int>(std::floor((snr_max - snr_min) / snr_step + 1e-9)) + 1;
    for (int k = 0; k < count; ++k) grid.push_back(snr_min + k * snr_step);
    return grid;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

inline long parse_int(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (x != std::floor(x)) throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  return static_cast<long>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline bool is_known_mode(const std::string& m) {
  return m == "raw" || m == "oracle_pc" || m == "learned_pc" || m == "mmse" || m == "vp_reference";
}

// Applies one key=value setting. Unknown keys and malformed values throw ConfigError.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = detail::trim(key_in);
  const std::string v = detail::trim(value_in);
  if (key == "M" || key == "order") cfg.order = static_cast<int>(detail::parse_int(key, v));
  else if (key == "sigma_min") cfg.sigma_min = detail::parse_real(key, v);
  else if (key == "sigma_max") cfg.sigma_max = detail::parse_real(key, v);
  else if (key == "N" || key == "levels") cfg.levels = static_cast<int>(detail::parse_int(key, v));
  else if (key == "L") cfg.L = static_cast<int>(detail::parse_int(key, v));
  else if (key == "r") cfg.r = detail::parse_real(key, v);
  else if (key == "denoise_final") cfg.denoise_final = detail::parse_bool(key, v);
  else if (key == "n" || key == "symbols") cfg.symbols = static_cast<int>(detail::parse_int(key, v));
  else if (key == "snr_min") cfg.snr_min = detail::parse_real(key, v);
  else if (key == "snr_max") cfg.snr_max = detail::parse_real(key, v);
  else if (key == "snr_step") cfg.snr_step = detail::parse_real(key, v);
  else if (key == "trials") cfg.trials = static_cast<int>(detail::parse_int(key, v));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, v));
  else if (key == "threads") cfg.threads = static_cast<unsigned>(detail::parse_int(key, v));
  else if (key == "vp_beta") cfg.vp_beta = detail::parse_real(key, v);
  else if (key == "modes") {
    cfg.modes = detail::split_list(v);
    for (const auto& m : cfg.modes)
      if (!is_known_mode(m)) throw ConfigError("unknown sweep mode '" + m + "'");
  } else if (key == "output") cfg.output = v;
  else if (key == "checkpoint") cfg.checkpoint = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

// Plain-text key=value lines; '#' starts a comment.
inline void load_config(std::istream& is, ExperimentConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

inline void load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_config(in, cfg);
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.order != 2 && cfg.order != 4 && cfg.order != 16 && cfg.order != 64)
    throw ConfigError("M must be 2, 4, 16 or 64");
  if (cfg.symbols < 1) throw ConfigError("n must be >= 1");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  (void)cfg.schedule();
  cfg.sampler().validate();
  (void)cfg.snr_grid();
}

struct SweepRecord {
  double snr_db;
  std::string mode;
  double mse;
  double ser;
  double mmse_bound;
  int trials;
  std::uint64_t seed;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << "snr_db,mode,mse,ser,mmse_bound,trials,seed\n";
  for (const auto& r : records)
    os << fmt_real(r.snr_db) << ',' << r.mode << ',' << fmt_real(r.mse) << ',' << fmt_real(r.ser) << ','
       << fmt_real(r.mmse_bound) << ',' << r.trials << ',' << r.seed << '\n';
}

namespace detail {

struct ModeTally {
  double sq_err = 0.0;
  double sym_err = 0.0;
};

}  // namespace detail

// SNR sweep over the configured modes. Each (snr, trial) pair draws its own
// symbols and channel noise from a stream derived from the master seed, so the
// records are identical for any thread count; all modes see the same received
// sequences. `learned` is required when the modes include learned_pc.
inline std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, const MlpScoreModel* learned = nullptr) {
  validate(cfg);
  for (const auto& m : cfg.modes)
    if (m == "learned_pc" && learned == nullptr)
      throw ConfigError("learned_pc mode needs a score checkpoint");
  const ConstellationScheme scheme = build_scheme(cfg.order);
  const MixtureScoreOracle oracle(scheme);
  const SamplerConfig sampler = cfg.sampler();
  const std::vector<double> grid = cfg.snr_grid();
  for (double snr : grid) (void)snr_to_step(snr, sampler.schedule);

  const std::size_t n_modes = cfg.modes.size();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  // slot layout: [snr][trial][mode], plus one extra mode slot for the MMSE estimator
  std::vector<detail::ModeTally> tally(grid.size() * trials * (n_modes + 1));

  parallel_for(grid.size() * trials, cfg.threads, [&](std::size_t job) {
    const std::size_t si = job / trials;
    const std::size_t t = job % trials;
    const double snr = grid[si];
    const double sigma_ch = snr_to_sigma(snr);
    const std::uint64_t trial_id = (static_cast<std::uint64_t>(si) << 32) | t;
    Rng data = Rng::stream(cfg.seed, trial_id, 0);
    std::vector<int> sent(static_cast<std::size_t>(cfg.symbols));
    for (int& idx : sent) idx = data.uniform_int(0, scheme.order - 1);
    const SymbolSequence z0 = modulate(sent, scheme);
    const SymbolSequence rx = awgn_transmit(z0, sigma_ch, data);

    detail::ModeTally* slots = &tally[job * (n_modes + 1)];
    auto score_into = [&](detail::ModeTally& slot, const SymbolSequence& est) {
      slot.sq_err = mse(est, z0) * static_cast<double>(est.size());
      slot.sym_err = ser(sent, demodulate_hard(est, scheme)) * static_cast<double>(est.size());
    };

    SymbolSequence pm(rx.size());
    for (std::size_t k = 0; k < rx.size(); ++k) pm[k] = oracle.posterior_mean(rx[k], sigma_ch);
    score_into(slots[n_modes], pm);

    for (std::size_t mi = 0; mi < n_modes; ++mi) {
      const std::string& mode = cfg.modes[mi];
      Rng mode_rng = Rng::stream(cfg.seed, trial_id, 1 + mi);
      if (mode == "raw") {
        score_into(slots[mi], rx);
      } else if (mode == "mmse") {
        score_into(slots[mi], pm);
      } else if (mode == "oracle_pc") {
        score_into(slots[mi], pc_sample(rx, snr, oracle, sampler, mode_rng));
      } else if (mode == "learned_pc") {
        score_into(slots[mi], pc_sample(rx, snr, *learned, sampler, mode_rng));
      } else if (mode == "vp_reference") {
        const int step = snr_to_step(snr, sampler.schedule).step;
        score_into(slots[mi], vp_forward_reference(z0, step, cfg.vp_beta, mode_rng));
      }
    }
  });

  std::vector<SweepRecord> records;
  const double n_sym = static_cast<double>(trials) * cfg.symbols;
  for (std::size_t si = 0; si < grid.size(); ++si) {
    std::vector<detail::ModeTally> sum(n_modes + 1);
    for (std::size_t t = 0; t < trials; ++t)
      for (std::size_t mi = 0; mi <= n_modes; ++mi) {
        const auto& slot = tally[(si * trials + t) * (n_modes + 1) + mi];
        sum[mi].sq_err += slot.sq_err;
        sum[mi].sym_err += slot.sym_err;
      }
    const double bound = sum[n_modes].sq_err / n_sym;
    for (std::size_t mi = 0; mi < n_modes; ++mi)
      records.push_back({grid[si], cfg.modes[mi], sum[mi].sq_err / n_sym, sum[mi].sym_err / n_sym, bound,
                         cfg.trials, cfg.seed});
  }
  return records;
}

struct ScatterPoint {
  int step;
  std::string mode;  // scdm or vp_reference
  int trial;         // constellation point index is trial % M
  cplx value;
};

// Forward-corruption scatter at one step for the drift-free and drifted processes.
inline std::vector<ScatterPoint> emit_scatter(const ExperimentConfig& cfg, int step, int trials) {
  validate(cfg);
  const NoiseSchedule sched = cfg.schedule();
  if (step < 1 || step > sched.levels()) throw ConfigError("scatter step outside [1, N]");
  if (trials < 1) throw ConfigError("scatter needs trials >= 1");
  const ConstellationScheme scheme = build_scheme(cfg.order);
  std::vector<ScatterPoint> scdm_rows, vp_rows;
  for (int t = 0; t < trials; ++t) {
    const SymbolSequence z0{scheme.points[static_cast<std::size_t>(t % scheme.order)]};
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(t), 0);
    scdm_rows.push_back({step, "scdm", t, forward_diffuse(z0, step, sched, rng)[0]});
    vp_rows.push_back({step, "vp_reference", t, vp_forward_reference(z0, step, cfg.vp_beta, rng)[0]});
  }
  scdm_rows.insert(scdm_rows.end(), vp_rows.begin(), vp_rows.end());
  return scdm_rows;
}

inline void write_scatter_csv(std::ostream& os, const std::vector<ScatterPoint>& rows) {
  os << "step,mode,trial,re,im\n";
  for (const auto& p : rows)
    os << p.step << ',' << p.mode << ',' << p.trial << ',' << fmt_real(p.value.real()) << ','
       << fmt_real(p.value.imag()) << '\n';
}

}  // namespace scdm
