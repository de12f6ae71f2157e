#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "gibbsforge/dynamics.hpp"
#include "gibbsforge/equilibrium.hpp"
#include "gibbsforge/errors.hpp"
#include "gibbsforge/gibbs.hpp"
#include "gibbsforge/grid.hpp"
#include "gibbsforge/hypotheses.hpp"
#include "gibbsforge/hyptimes.hpp"
#include "gibbsforge/io.hpp"
#include "gibbsforge/potentials.hpp"
#include "gibbsforge/stability.hpp"
#include "gibbsforge/transfer.hpp"

#ifndef GIBBSFORGE_VERSION
#define GIBBSFORGE_VERSION "0.1.0"
#endif

namespace gibbsforge {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_hypothesis = 2,
  exit_no_convergence = 3,
};

struct RunResult {
  int exit_code = exit_ok;
  std::string message;
  std::vector<std::string> files;
};

namespace detail {

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
  return s;
}

/// grid_n must be (number of branches) * 2^m or a power of the number of
/// branches, so uniform bins line up with the branch breakpoints of the
/// builtin maps or the grid is a cylinder grid.
inline bool grid_size_allowed(std::size_t n, std::size_t branches) {
  if (branches < 1) return false;
  if (exact_log(n, branches) >= 0) return true;
  if (n % branches != 0) return false;
  std::size_t m = n / branches;
  return m >= 1 && (m & (m - 1)) == 0;
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg)
      : cfg_(cfg),
        map_(builtin_map(cfg.map_name, cfg.map_params)),
        phi_(builtin_potential(cfg.potential_name, cfg.potential_params, map_)) {}

  RunResult run() {
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.output_dir);
    if (!grid_size_allowed(cfg_.grid_n, map_.branches().size())) {
      throw Error(ErrorKind::config_parse_error,
                  "field 'grid_n': must be a power of two times the number of branches");
    }
    HypothesisOptions hopt;
    hopt.sigma = cfg_.sigma;
    hopt.gamma = cfg_.gamma;
    report_ = check_hypotheses(map_, phi_, hopt);
    write_report();
    if (!report_.passes_all() && cfg_.enforce_hypotheses) {
      std::string names;
      for (const auto& f : report_.failing()) names += (names.empty() ? "" : ", ") + f;
      result_.exit_code = exit_hypothesis;
      result_.message = "hypothesis violated: " + names;
      return result_;
    }
    const std::string& e = cfg_.experiment;
    if (e == "analyze") return result_;
    grid_ = make_grid(map_, cfg_.grid_n, parse_grid_kind(cfg_.grid_kind));
    if (e == "stat-sweep") {
      stat_sweep();
      return result_;
    }
    if (e == "stoch-sweep") {
      stoch_sweep();
      return result_;
    }
    eigen_ = solve_transfer(map_, phi_, grid_, PowerOptions{cfg_.tol, cfg_.max_iter, parse_transfer_scheme(cfg_.scheme)});
    write_eigendata();
    if (e == "equilibrium") equilibrium();
    else if (e == "gibbs") gibbs();
    else if (e == "hyptimes") hyptimes();
    return result_;
  }

 private:
  std::string path(const std::string& name) {
    std::string p = (std::filesystem::path(cfg_.output_dir) / name).string();
    result_.files.push_back(p);
    return p;
  }

  Metadata meta() const {
    Metadata m{{"tool", "gibbsforge"},
               {"version", GIBBSFORGE_VERSION},
               {"experiment", cfg_.experiment},
               {"map", cfg_.map_name},
               {"map_params", join_numbers(cfg_.map_params)},
               {"potential", cfg_.potential_name},
               {"potential_params", join_numbers(cfg_.potential_params)},
               {"seed", std::to_string(cfg_.seed)},
               {"grid_n", std::to_string(cfg_.grid_n)},
               {"grid_kind", cfg_.grid_kind},
               {"scheme", cfg_.scheme},
               {"tol", format_number(cfg_.tol)},
               {"max_iter", std::to_string(cfg_.max_iter)}};
    if (cfg_.timestamp) {
      std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char buf[32];
      std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      m.emplace_back("timestamp", buf);
    }
    return m;
  }

  Json meta_json() const {
    Json j = Json::object();
    for (const auto& [k, v] : meta()) j[k] = v;
    return j;
  }

  double chosen_c() const {
    double c = cfg_.c ? *cfg_.c : report_.admissible_c;
    if (!(c > 0.0)) throw Error(ErrorKind::hypothesis_violated, "no admissible c > 0");
    return c;
  }

  double chosen_delta() const { return cfg_.delta ? *cfg_.delta : default_delta(map_); }

  void write_report() {
    Json j;
    j["meta"] = meta_json();
    j["h_f"] = json_number(report_.h_f);
    j["L_sup_inside"] = json_number(report_.L_sup_inside);
    j["L_sup_outside"] = json_number(report_.L_sup_outside);
    j["sigma"] = json_number(report_.sigma);
    j["q"] = report_.q;
    j["k0"] = report_.k0;
    j["oscillation"] = json_number(report_.oscillation);
    j["p_margin"] = json_number(report_.p_margin);
    j["p_margin_weak"] = json_number(report_.p_margin_weak);
    j["eps0"] = json_number(report_.eps0);
    j["admissible_c"] = json_number(report_.admissible_c);
    j["gamma"] = json_number(report_.gamma);
    j["passes_H1"] = report_.passes_H1;
    j["passes_H2"] = report_.passes_H2;
    j["passes_P"] = report_.passes_P;
    j["failing"] = report_.failing();
    save_json(j, path("hypothesis_report.json"));
  }

  void write_eigendata() {
    CsvWriter csv(meta(), {"midpoint", "h", "nu"});
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      csv.row({grid_.midpoint(i), eigen_.eigenfunction[i], eigen_.eigenmeasure.weight(i)});
    }
    csv.save(path("eigendata.csv"));
    Json j;
    j["meta"] = meta_json();
    j["lambda"] = json_number(eigen_.lambda);
    j["pressure"] = json_number(pressure(eigen_));
    j["residual_right"] = json_number(eigen_.residual_right);
    j["residual_left"] = json_number(eigen_.residual_left);
    j["iterations"] = eigen_.iterations;
    save_json(j, path("eigendata.json"));
  }

  void equilibrium() {
    EquilibriumState eq = solve_equilibrium(map_, phi_, eigen_);
    CsvWriter csv(meta(), {"lo", "hi", "mu", "density_vs_nu"});
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      csv.row({grid_.lo(i), grid_.hi(i), eq.measure.weight(i), eq.density_vs_nu[i]});
    }
    csv.save(path("equilibrium.csv"));
    Json j;
    j["meta"] = meta_json();
    j["lambda"] = json_number(eigen_.lambda);
    j["pressure"] = json_number(pressure(eigen_));
    j["entropy"] = json_number(eq.entropy);
    j["entropy_direct"] = json_number(eq.entropy_direct);
    j["rokhlin_discrepancy"] = json_number(eq.rokhlin_discrepancy);
    j["phi_integral"] = json_number(eq.phi_integral);
    j["variational_defect"] = json_number(eq.variational_defect);
    j["density_sup"] = json_number(eq.density_sup);
    j["density_inf"] = json_number(eq.density_inf);
    save_json(j, path("equilibrium.json"));
  }

  void gibbs() {
    const double c = chosen_c(), delta = chosen_delta();
    const long samples = std::min<long>(cfg_.samples, 100000);
    GibbsSurvey s = gibbs_survey(map_, phi_, eigen_, c, delta, cfg_.n_max, samples, cfg_.seed);
    CsvWriter csv(meta(), {"x", "n", "ratio"});
    for (const auto& r : s.rows) csv.row({r.x, static_cast<double>(r.n), r.ratio});
    csv.save(path("gibbs_ratios.csv"));
    Json j;
    j["meta"] = meta_json();
    j["c"] = json_number(c);
    j["delta"] = json_number(delta);
    j["count"] = s.rows.size();
    j["min_ratio"] = json_number(s.min_ratio);
    j["max_ratio"] = json_number(s.max_ratio);
    j["K"] = json_number(s.K);
    j["K0_bound"] = json_number(distortion_bound(phi_.hoelder_constant, phi_.hoelder_exponent, c, delta));
    save_json(j, path("gibbs_summary.json"));
  }

  void hyptimes() {
    const double c = chosen_c();
    FirstTimeTail t = first_time_tail(map_, eigen_.eigenmeasure, c, cfg_.n_max, cfg_.samples, cfg_.seed);
    CsvWriter csv(meta(), {"n", "probability"});
    for (std::size_t n = 0; n < t.tail.size(); ++n) csv.row({static_cast<double>(n), t.tail[n]});
    csv.save(path("hyptimes_tail.csv"));
    Json j;
    j["meta"] = meta_json();
    j["c"] = json_number(c);
    j["samples"] = t.samples;
    j["escaped"] = t.escaped;
    j["censored"] = t.censored;
    j["mean_n1"] = json_number(t.mean_n1);
    double tail_sum = 0.0;
    for (double p : t.tail) tail_sum += p;
    j["tail_sum"] = json_number(tail_sum);
    // One long orbit from a nu-typical point for the gap statistics.
    auto rng = sample_rng(cfg_.seed, static_cast<std::uint64_t>(cfg_.samples));
    OrbitOptions o;
    o.jitter = kOrbitJitter;
    o.seed = rng();
    j["orbit_length"] = cfg_.orbit_length;
    try {
      HyperbolicTimeRecord r =
          hyperbolic_times(make_orbit(map_, eigen_.eigenmeasure.sample(rng), cfg_.orbit_length, o), c);
      j["orbit_time_count"] = r.times.size();
      j["orbit_time_density"] = json_number(r.density);
      j["max_gap"] = r.max_gap;
      j["max_gap_ratio"] = json_number(r.max_gap_ratio);
    } catch (const OrbitEscapedError& err) {
      j["orbit_escaped_at"] = err.step();
    }
    save_json(j, path("hyptimes_summary.json"));
  }

  void write_sweep(const SweepResult& r, const std::string& label) {
    CsvWriter csv(meta(), {"parameter", "L1", "kolmogorov", "lambda", "pressure"});
    for (std::size_t i = 0; i < r.parameter.size(); ++i) {
      csv.row({r.parameter[i], r.distance_L1[i], r.distance_kolmogorov[i], r.lambdas[i], r.pressures[i]});
    }
    csv.save(path("sweep.csv"));
    Json j;
    j["meta"] = meta_json();
    j["kind"] = label;
    if (label == "stochastic") j["noise"] = cfg_.noise;
    j["parameter"] = json_numbers(r.parameter);
    j["distance_L1"] = json_numbers(r.distance_L1);
    j["distance_kolmogorov"] = json_numbers(r.distance_kolmogorov);
    j["lambdas"] = json_numbers(r.lambdas);
    j["pressures"] = json_numbers(r.pressures);
    double max_l1 = 0.0;
    for (double d : r.distance_L1) max_l1 = std::max(max_l1, d);
    j["max_L1"] = json_number(max_l1);
    save_json(j, path("sweep.json"));
  }

  void stat_sweep() {
    if (cfg_.sweep.empty()) throw Error(ErrorKind::config_parse_error, "field 'sweep': stat-sweep needs values");
    const bool on_map = cfg_.sweep_target == "map";
    const auto& params = on_map ? cfg_.map_params : cfg_.potential_params;
    if (cfg_.sweep_index >= params.size()) {
      throw Error(ErrorKind::config_parse_error, "field 'sweep_index': out of range");
    }
    const double base = cfg_.sweep_base ? *cfg_.sweep_base : params[cfg_.sweep_index];
    PerturbationFamily fam;
    for (double v : cfg_.sweep) fam.parameter_values.push_back(v - base);
    const ExperimentConfig cfg = cfg_;
    fam.map_at = [cfg, base, on_map](double t) {
      auto p = cfg.map_params;
      if (on_map) p[cfg.sweep_index] = base + t;
      return builtin_map(cfg.map_name, p);
    };
    fam.potential_at = [cfg, base, on_map](double t, const IntervalMap& m) {
      auto p = cfg.potential_params;
      if (!on_map) p[cfg.sweep_index] = base + t;
      return builtin_potential(cfg.potential_name, p, m);
    };
    SweepOptions opt;
    opt.hypotheses.sigma = cfg_.sigma;
    opt.hypotheses.gamma = cfg_.gamma;
    opt.power = PowerOptions{cfg_.tol, cfg_.max_iter, parse_transfer_scheme(cfg_.scheme)};
    SweepResult r = statistical_sweep(fam, grid_, opt);
    for (double& t : r.parameter) t += base;
    write_sweep(r, "statistical");
  }

  void stoch_sweep() {
    if (cfg_.sweep.empty()) throw Error(ErrorKind::config_parse_error, "field 'sweep': stoch-sweep needs epsilons");
    SweepOptions opt;
    opt.hypotheses.sigma = cfg_.sigma;
    opt.hypotheses.gamma = cfg_.gamma;
    opt.power = PowerOptions{cfg_.tol, cfg_.max_iter, parse_transfer_scheme(cfg_.scheme)};
    opt.noise = parse_noise_reference(cfg_.noise);
    write_sweep(stochastic_sweep(map_, phi_, grid_, cfg_.sweep, opt), "stochastic");
  }

  ExperimentConfig cfg_;
  IntervalMap map_;
  Potential phi_;
  HypothesisReport report_;
  Grid grid_;
  EigenData eigen_;
  RunResult result_;
};

}  // namespace detail

/// Runs one experiment and maps failures onto exit codes: 1 for
/// configuration errors, 2 for hypothesis violations, 3 for numerical
/// non-convergence.
inline RunResult run(const ExperimentConfig& cfg) {
  try {
    detail::Runner runner(cfg);
    return runner.run();
  } catch (const Error& e) {
    RunResult r;
    r.message = e.what();
    switch (e.kind()) {
      case ErrorKind::hypothesis_violated: r.exit_code = exit_hypothesis; break;
      case ErrorKind::no_convergence: r.exit_code = exit_no_convergence; break;
      default: r.exit_code = exit_config; break;
    }
    return r;
  }
}

}  // namespace gibbsforge
