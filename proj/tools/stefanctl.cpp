#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/control.hpp"
#include "stefan/csv.hpp"
#include "stefan/model.hpp"
#include "stefan/spectral.hpp"
#include "stefan/stepper.hpp"
#include "stefan/synthesis.hpp"

namespace fs = std::filesystem;
using namespace stefan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverError = 3;

struct Summary {
  std::map<std::string, std::string> kv;
  bool all_pass = true;
  void put(const std::string& k, double v) { kv[k] = format_double(v); }
  void put(const std::string& k, const std::string& v) { kv[k] = v; }
  void check(const std::string& k, bool pass) {
    kv["check." + k] = pass ? "pass" : "fail";
    all_pass = all_pass && pass;
  }
  void write(const std::string& path) const {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    write_text_file(path, os.str());
  }
};

void write_trajectory_csv(const Trajectory& traj, const DomainConfig& dom, double dx,
                          const std::string& path) {
  CsvTable t({"t", "energy", "norm_y", "norm_h"});
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    t.add_row({traj.times[k], traj.energies[k], y_l2_norm(traj.states[k], dx),
               h_norm(traj.states[k], dom.sigma, dx)});
  t.write(path);
}

/// Long-format (t, series, value) tables for external plotting.
void emit_plot_data(const Trajectory& traj, const DomainConfig& dom, double dx,
                    const std::vector<double>* control_series, const GridSpec& grid,
                    const DomainConfig& dom2, const std::string& path) {
  (void)dom2;
  (void)grid;
  CsvTable t({"t", "series", "value"});
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    t.add_text_row({format_double(traj.times[k]), "norm_y",
                    format_double(y_l2_norm(traj.states[k], dx))});
  }
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    t.add_text_row({format_double(traj.times[k]), "norm_h",
                    format_double(h_norm(traj.states[k], dom.sigma, dx))});
  }
  if (control_series) {
    for (std::size_t k = 0; k < control_series->size(); ++k) {
      const double tk = k < traj.times.size() ? traj.times[k] : 0.0;
      t.add_text_row({format_double(tk), "control_l2_omega",
                      format_double((*control_series)[k])});
    }
  }
  t.write(path);
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const SparseOperator A = assemble_system(cfg.grid, cfg.domain);
  const SparseOperator B = assemble_control_injection(cfg.grid, cfg.region, cfg.domain);
  const State z0 = cfg.make_initial();
  const ControlField u = ControlField::zero(cfg.grid.nt + 1, static_cast<int>(B.mat.cols()));
  const Trajectory traj = simulate(A, B, z0, u, cfg.grid, cfg.domain);
  const double dx = cfg.grid.dx(cfg.domain);
  fs::create_directories(cfg.output_dir);
  write_trajectory_csv(traj, cfg.domain, dx, cfg.output_dir + "/trajectory.csv");
  emit_plot_data(traj, cfg.domain, dx, nullptr, cfg.grid, cfg.domain,
                 cfg.output_dir + "/plot_trajectory.csv");
  Summary s;
  s.put("command", std::string("simulate"));
  s.put("seed", static_cast<double>(cfg.seed));
  s.put("energy.initial", traj.energies.front());
  s.put("energy.final", traj.energies.back());
  bool monotone = true;
  if (cfg.domain.sigma > 0.0) {
    for (std::size_t k = 1; k < traj.energies.size(); ++k)
      if (traj.energies[k] > traj.energies[k - 1] + 1e-10 * std::max(traj.energies[0], 1.0))
        monotone = false;
    s.check("energy_nonincreasing", monotone);
  }
  s.write(cfg.output_dir + "/summary.txt");
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_control(const ExperimentConfig& cfg) {
  const SparseOperator A = assemble_system(cfg.grid, cfg.domain);
  const SparseOperator B = assemble_control_injection(cfg.grid, cfg.region, cfg.domain);
  const State z0 = cfg.make_initial();
  const double dx = cfg.grid.dx(cfg.domain);
  const ControlSolution sol =
      solve_minimal_norm_control(A, B, z0, cfg.grid, cfg.domain, cfg.backend, cfg.tolerance);
  if (!sol.converged) {
    std::cerr << "control: solver did not converge (backend " << to_string(sol.backend) << ")\n";
    return kExitSolverError;
  }
  fs::create_directories(cfg.output_dir);
  CsvTable cn({"t", "control_l2_omega"});
  const double dt = cfg.grid.dt(cfg.domain);
  for (std::size_t k = 0; k < sol.omega_norm_series.size(); ++k)
    cn.add_row({static_cast<double>(k) * dt, sol.omega_norm_series[k]});
  cn.write(cfg.output_dir + "/control_norm.csv");
  const Trajectory traj = simulate(A, B, z0, sol.u, cfg.grid, cfg.domain);
  write_trajectory_csv(traj, cfg.domain, dx, cfg.output_dir + "/controlled_trajectory.csv");
  emit_plot_data(traj, cfg.domain, dx, &sol.omega_norm_series, cfg.grid, cfg.domain,
                 cfg.output_dir + "/plot_control.csv");

  const double scale = state_norm(z0, cfg.domain.sigma, dx);
  Summary s;
  s.put("command", std::string("control"));
  s.put("seed", static_cast<double>(cfg.seed));
  s.put("backend", to_string(sol.backend));
  s.put("control_norm", sol.control_norm);
  s.put("terminal.norm_y", sol.terminal_y_norm);
  s.put("terminal.norm_h", sol.terminal_h_norm);
  s.put("terminal.relative_y", scale > 0 ? sol.terminal_y_norm / scale : 0.0);
  s.put("terminal.relative_h", scale > 0 ? sol.terminal_h_norm / scale : 0.0);
  s.check("terminal_below_tolerance",
          scale == 0.0 || (sol.terminal_y_norm <= cfg.tolerance * scale &&
                           sol.terminal_h_norm <= cfg.tolerance * scale));
  s.write(cfg.output_dir + "/summary.txt");
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  CsvTable t({"n", "k", "case", "lambda", "nu", "c_norm", "gap_to_next"});
  bool all_ok = true;
  double worst_res = 0.0;
  for (int n = 1; n <= cfg.spectrum_n_max; ++n) {
    const Spectrum sp = spectrum(n, cfg.domain.sigma, cfg.spectrum_K);
    const SpectralReport rep = spectral_checks(n, cfg.domain.sigma, cfg.spectrum_K);
    all_ok = all_ok && rep.pass();
    worst_res = std::max(worst_res, rep.max_residual);
    for (std::size_t k = 0; k < sp.pairs.size(); ++k) {
      const EigenPair& p = sp.pairs[k];
      const double gap =
          k + 1 < sp.pairs.size() ? p.lambda - sp.pairs[k + 1].lambda : 0.0;
      t.add_text_row({format_double(p.n), std::to_string(p.k), to_string(p.kind),
                      format_double(p.lambda), format_double(p.nu), format_double(p.c_norm),
                      format_double(gap)});
    }
  }
  t.write(cfg.output_dir + "/eigenvalues.csv");
  Summary s;
  s.put("command", std::string("spectrum"));
  s.put("sigma", cfg.domain.sigma);
  s.put("max_residual", worst_res);
  s.check("spectral_suite", all_ok);
  s.write(cfg.output_dir + "/summary.txt");
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_observability(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::vector<double> ts;
  for (int i = 0; i < cfg.obs_points; ++i)
    ts.push_back(cfg.obs_t_min +
                 (cfg.obs_t_max - cfg.obs_t_min) * i / std::max(cfg.obs_points - 1, 1));
  const CostFit fit = observability_cost_sweep(cfg.obs_n, cfg.domain.sigma, cfg.window_c,
                                               cfg.window_d, cfg.obs_K, ts);
  CsvTable t({"T", "K_est", "basis_size"});
  for (const CostEstimate& ce : fit.table)
    t.add_row({ce.T, ce.K_est, static_cast<double>(ce.basis_size)});
  t.write(cfg.output_dir + "/cost.csv");
  bool monotone = true;
  for (std::size_t i = 1; i < fit.table.size(); ++i)
    if (fit.table[i].K_est > fit.table[i - 1].K_est * (1.0 + 1e-10)) monotone = false;
  Summary s;
  s.put("command", std::string("observability"));
  s.put("fit.M", fit.M);
  s.put("fit.r_squared", fit.r_squared);
  s.check("cost_nonincreasing_in_T", monotone);
  s.check("fit_r_squared", fit.r_squared >= 0.95);
  s.write(cfg.output_dir + "/summary.txt");
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_lr(const ExperimentConfig& cfg) {
  const State z0 = cfg.make_initial();
  ControlRegion rect =
      ControlRegion::make_rectangle(0.0, cfg.domain.period, cfg.lr_window_c, cfg.lr_window_d);
  LrResult res;
  try {
    res = lr_synthesize(z0, cfg.grid, cfg.domain, rect, cfg.lr);
  } catch (const std::exception& e) {
    std::cerr << "lr: " << e.what() << "\n";
    return kExitSolverError;
  }
  fs::create_directories(cfg.output_dir);
  CsvTable t({"j", "T_j", "mu_j", "interval_control_norm", "interval_end_state_norm"});
  for (const LrIntervalReport& r : res.intervals)
    t.add_row({static_cast<double>(r.j), r.T_j, r.mu_j, r.control_norm, r.end_state_norm});
  t.write(cfg.output_dir + "/lr_report.csv");
  Summary s;
  s.put("command", std::string("lr"));
  s.put("initial_norm", res.initial_norm);
  s.put("final_norm", res.final_norm);
  s.put("final_relative", res.initial_norm > 0 ? res.final_norm / res.initial_norm : 0.0);
  s.put("replay_gap", res.replay_gap);
  s.put("total_control_norm", res.total_control_norm);
  s.check("final_below_tolerance",
          res.initial_norm == 0.0 || res.final_norm <= 1e-4 * res.initial_norm);
  s.check("replay_consistent", res.replay_gap <= 1e-9);
  s.write(cfg.output_dir + "/summary.txt");
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

int cmd_series(const ExperimentConfig& cfg) {
  const SeriesResult r = series_lemma(cfg.series_c, cfg.series_d, cfg.series_terms);
  fs::create_directories(cfg.output_dir);
  Summary s;
  s.put("command", std::string("series"));
  s.put("partial_sum", r.partial_sum);
  s.put("closed_form", r.closed_form);
  s.put("abs_gap", std::abs(r.partial_sum - r.closed_form));
  s.write(cfg.output_dir + "/summary.txt");
  return kExitOk;
}

int cmd_check_all(const ExperimentConfig& cfg) {
  Summary s;
  s.put("command", std::string("check-all"));
  s.put("seed", static_cast<double>(cfg.seed));
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // spectral battery at a reduced sweep
  {
    bool ok = true;
    for (int n : {1, 2, 5, 13}) {
      for (double sg : {0.5, 2.0, 10.0}) ok = ok && spectral_checks(n, sg, 12).pass();
    }
    s.check("spectral", ok);
  }
  // energy dissipation on the configured problem
  {
    DomainConfig dom = cfg.domain;
    if (dom.sigma == 0.0) dom.sigma = 10.0;
    const SparseOperator A = assemble_system(cfg.grid, dom);
    const SparseOperator B = assemble_control_injection(cfg.grid, cfg.region, dom);
    const State z0 = preset_initial_data("fig_hum", cfg.grid, dom);
    const ControlField u = ControlField::zero(cfg.grid.nt + 1, static_cast<int>(B.mat.cols()));
    const Trajectory traj = simulate(A, B, z0, u, cfg.grid, dom);
    bool monotone = true;
    for (std::size_t k = 1; k < traj.energies.size(); ++k)
      if (traj.energies[k] > traj.energies[k - 1] + 1e-10 * std::max(traj.energies[0], 1.0))
        monotone = false;
    s.check("energy_dissipation", monotone);
  }
  // duality identity on random data at a small grid
  {
    GridSpec g;
    g.nx = 8;
    g.nt = 50;
    DomainConfig dom = cfg.domain;
    dom.period = 2.0;
    const SparseOperator A = assemble_system(g, dom);
    ControlRegion rect = ControlRegion::make_rectangle(0.2, 1.6, -0.75, 0.5);
    const SparseOperator B = assemble_control_injection(g, rect, dom);
    State z0 = State::zero(g), zT = State::zero(g);
    for (auto& v : z0.y) v = gauss(rng);
    for (auto& v : z0.h) v = gauss(rng);
    for (auto& v : zT.y) v = gauss(rng);
    for (auto& v : zT.h) v = gauss(rng);
    ControlField u = ControlField::zero(g.nt + 1, static_cast<int>(B.mat.cols()));
    for (auto& v : u.u) v = gauss(rng);
    const DualityCheck dc = duality_check(A, B, z0, u, zT, g, dom);
    s.put("duality_gap", dc.relative_gap());
    s.check("duality", dc.relative_gap() <= 1e-10);
  }
  // mode invariance of the assembled operator
  {
    const ModeInvarianceReport rep =
        mode_invariance_check(cfg.grid, cfg.domain, static_cast<unsigned>(cfg.seed));
    s.put("offmode_leak", rep.max_offmode_leak);
    s.put("commutator", rep.commutator_norm);
    s.check("mode_invariance", rep.pass());
  }
  // series lemma
  {
    const SeriesResult r1 = series_lemma(0.0, 0.5, 10000);
    const SeriesResult r2 = series_lemma(-0.2, 0.5, 10000);
    s.check("series", std::abs(r1.partial_sum - r1.closed_form) <= 1e-3 &&
                          std::abs(r2.partial_sum - r2.closed_form) <= 1e-3);
  }
  fs::create_directories(cfg.output_dir);
  s.write(cfg.output_dir + "/summary.txt");
  std::cout << (s.all_pass ? "check-all: pass" : "check-all: FAIL") << "\n";
  return s.all_pass ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stefanctl: simulation, spectra, observability costs and minimal-norm null controls for "
      "the linearized one-phase Stefan problem with surface tension on a periodic strip"};
  std::string config_path;
  std::string command;
  std::string out_dir;
  long long seed = -1;
  double tol = -1.0;
  app.add_option("--config", config_path, "path to a key/value config file");
  app.add_option("--command", command,
                 "simulate | control | spectrum | observability | lr | series | check-all")
      ->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for randomized checks (overrides seed)");
  app.add_option("--tol", tol, "terminal tolerance (overrides control.tolerance)");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = load_config_file(config_path);
    } else {
      apply_env_overrides(cfg);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<unsigned long long>(seed);
    if (tol > 0.0) cfg.tolerance = tol;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "control") return cmd_control(cfg);
    if (command == "spectrum") return cmd_spectrum(cfg);
    if (command == "observability") return cmd_observability(cfg);
    if (command == "lr") return cmd_lr(cfg);
    if (command == "series") return cmd_series(cfg);
    if (command == "check-all") return cmd_check_all(cfg);
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitSolverError;
  }
  std::cerr << "unknown command: " << command << "\n";
  return kExitConfigError;
}
