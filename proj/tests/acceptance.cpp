// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "stefan/assembly.hpp"
#include "stefan/control.hpp"
#include "stefan/model.hpp"
#include "stefan/spectral.hpp"
#include "stefan/stepper.hpp"
#include "stefan/synthesis.hpp"

using namespace stefan;

namespace {

int g_failures = 0;

void report(int id, const char* what, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what, detail.c_str());
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

GridSpec grid_of(int nx, int nt) {
  GridSpec g;
  g.nx = nx;
  g.nt = nt;
  return g;
}

DomainConfig fig_domain(double sigma) {
  DomainConfig d;
  d.period = 2.0;
  d.sigma = sigma;
  d.horizon = 0.1;
  return d;
}

// Figure reproduction: sigma in {10, 0}, dx = 2/13, nt = 200, tilted band.
void criterion_figure(int id, double sigma) {
  const double t0 = now_seconds();
  const GridSpec g = grid_of(12, 200);
  const DomainConfig dom = fig_domain(sigma);
  const SparseOperator A = assemble_system(g, dom);
  const ControlRegion band = ControlRegion::make_tilted_band(0.5, 1.5, 1.0, 1.5);
  const SparseOperator B = assemble_control_injection(g, band, dom);
  const State z0 = preset_initial_data("fig_hum", g, dom);
  const ControlSolution sol = solve_minimal_norm_control(A, B, z0, g, dom, Backend::kkt, 1e-6);
  const double scale = state_norm(z0, dom.sigma, g.dx(dom));
  const double ry = sol.terminal_y_norm / scale;
  const double rh = sol.terminal_h_norm / scale;
  const double elapsed = now_seconds() - t0;
  const bool pass = sol.converged && ry <= 1e-6 && rh <= 1e-6 && elapsed < 60.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "rel |y(T)|=%.2e, rel |h(T)|=%.2e, |u|=%.4g, %.1fs", ry, rh,
                sol.control_norm, elapsed);
  report(id, sigma > 0 ? "figure reproduction, sigma=10" : "figure reproduction, sigma=0", pass,
         buf);
}

void criterion_backend_agreement() {
  const GridSpec g = grid_of(8, 50);
  DomainConfig dom;
  dom.sigma = 1.0;
  dom.horizon = 0.3;
  const SparseOperator A = assemble_system(g, dom);
  const SparseOperator B =
      assemble_control_injection(g, ControlRegion::make_rectangle(0.2, 1.6, -0.75, 0.5), dom);
  std::mt19937_64 rng(20240);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    State z0 = State::zero(g);
    for (auto& v : z0.y) v = gauss(rng);
    for (auto& v : z0.h) v = gauss(rng);
    worst = std::max(worst, backend_agreement(A, B, z0, g, dom));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst relative gap %.2e over 5 random data", worst);
  report(3, "kkt vs gramian-cg control norms within 1e-4", worst <= 1e-4, buf);
}

void criterion_spectral_suite() {
  const double t0 = now_seconds();
  double worst_res = 0.0, min_gap = 1e300, min_gap_tail = 1e300;
  bool ok = true;
  for (double sigma : {0.5, 2.0, 10.0}) {
    for (int n = 1; n <= 50; ++n) {
      const Spectrum sp = spectrum(n, sigma, 20);
      for (const EigenPair& p : sp.pairs) {
        worst_res = std::max(worst_res, std::abs(p.residual()));
        if (p.lambda > -std::min(sigma / 2.0, 1.0) * n * n * (1.0 - 1e-14)) ok = false;
      }
      if (sigma == 2.0 && sp.pairs[0].lambda != -static_cast<double>(n) * n) ok = false;
      for (std::size_t k = 0; k + 1 < sp.pairs.size(); ++k) {
        const double gap = sp.pairs[k].lambda - sp.pairs[k + 1].lambda;
        min_gap = std::min(min_gap, gap);
        if (k >= 1) min_gap_tail = std::min(min_gap_tail, gap);
      }
    }
  }
  const double elapsed = now_seconds() - t0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double quarter = pi2 / 4.0;
  const double threeeighth = 3.0 * pi2 / 8.0;
  const bool pass = ok && worst_res <= 1e-11 && min_gap >= quarter - 1e-9 &&
                    min_gap_tail >= threeeighth - 1e-9 && elapsed < 10.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max residual %.2e, min gap %.4f, tail gap %.4f, %.2fs", worst_res, min_gap,
                min_gap_tail, elapsed);
  report(4, "spectral suite n=1..50, sigma in {0.5,2,10}, K=20", pass, buf);
}

void criterion_discrete_vs_analytic() {
  double worst = 0.0;
  for (double n : {1.0, 2.0, 5.0}) {
    for (double sigma : {0.5, 2.0, 10.0}) {
      const Spectrum sp = spectrum(n, sigma, 3);
      auto [A, w] = assemble_mode_operator(n * n, sigma, 400);
      Eigen::EigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A.mat)};
      std::vector<double> evs;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        evs.push_back(es.eigenvalues()[i].real());
      std::sort(evs.begin(), evs.end(), std::greater<>());
      for (int k = 0; k < 3; ++k)
        worst = std::max(worst, std::abs((evs[static_cast<std::size_t>(k)] -
                                          sp.pairs[static_cast<std::size_t>(k)].lambda) /
                                         sp.pairs[static_cast<std::size_t>(k)].lambda));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst relative eigenvalue error %.3f%%", 100.0 * worst);
  report(5, "m=400 mode operator matches analytic eigenvalues within 5%", worst <= 0.05, buf);
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const int m = panels % 2 == 0 ? panels : panels + 1;
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int j = 1; j < m; ++j) s += f(a + j * h) * (j % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

void criterion_eigenfunctions() {
  double worst_norm = 0.0, worst_orth = 0.0, worst_wm = 0.0, min_mass = 1e300;
  for (double sigma : {0.5, 2.0, 10.0}) {
    for (double n : {1.0, 3.0, 9.0}) {
      const Spectrum sp = spectrum(n, sigma, 8);
      for (std::size_t a = 0; a < sp.pairs.size(); ++a) {
        const EigenPair& p = sp.pairs[a];
        const double ymass =
            simpson([&](double x) { return p.phi(x) * p.phi(x); }, -1.0, 1.0, 10000);
        const double nrm = ymass + p.phi_at_1() * p.phi_at_1() / (sigma * n * n);
        worst_norm = std::max(worst_norm, std::abs(nrm - 1.0));
        const double wm = window_mass(p, -0.5, 0.2);
        const double quad = std::sqrt(
            simpson([&](double x) { return p.phi(x) * p.phi(x); }, -0.5, 0.2, 20000));
        worst_wm = std::max(worst_wm, std::abs(wm - quad));
        for (std::size_t b = a + 1; b < sp.pairs.size(); ++b) {
          const EigenPair& q = sp.pairs[b];
          const double cross =
              simpson([&](double x) { return p.phi(x) * q.phi(x); }, -1.0, 1.0, 10000) +
              sigma * n * n * p.h_component() * q.h_component();
          worst_orth = std::max(worst_orth, std::abs(cross));
        }
      }
    }
  }
  for (int n = 1; n <= 50; ++n) {
    const Spectrum sp = spectrum(n, 10.0, 21);
    for (const EigenPair& p : sp.pairs) min_mass = std::min(min_mass, window_mass(p, -0.5, 0.2));
  }
  const bool pass =
      worst_norm <= 1e-8 && worst_orth <= 1e-7 && worst_wm <= 1e-8 && min_mass > 0.01;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "norm err %.1e, orth %.1e, window err %.1e, min mass %.4f",
                worst_norm, worst_orth, worst_wm, min_mass);
  report(6, "eigenfunction certification by independent quadrature", pass, buf);
}

void criterion_series() {
  const SeriesResult a = series_lemma(0.0, 0.5, 10000);
  const SeriesResult b = series_lemma(-0.2, 0.5, 10000);
  const SeriesResult sym = series_lemma(-0.35, 0.35, 10000);
  const bool pass = std::abs(a.partial_sum - a.closed_form) <= 1e-3 &&
                    std::abs(b.partial_sum - b.closed_form) <= 1e-3 && sym.closed_form == 0.0 &&
                    a.closed_form == -0.0625;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "|S - closed form| = %.2e and %.2e, symmetric closed form %g",
                std::abs(a.partial_sum - a.closed_form), std::abs(b.partial_sum - b.closed_form),
                sym.closed_form);
  report(7, "series lemma partial sums against (c^2-d^2)/4", pass, buf);
}

void criterion_energy() {
  const GridSpec g = grid_of(12, 200);
  bool pass = true;
  double worst = 0.0;
  for (double sigma : {0.5, 2.0, 10.0}) {
    const DomainConfig dom = fig_domain(sigma);
    const SparseOperator A = assemble_system(g, dom);
    const ControlRegion rect = ControlRegion::make_rectangle(0.0, 2.0, -0.5, 0.2);
    const SparseOperator B = assemble_control_injection(g, rect, dom);
    const State z0 = preset_initial_data("fig_hum", g, dom);
    const Trajectory traj =
        simulate(A, B, z0, ControlField::zero(g.nt + 1, static_cast<int>(B.mat.cols())), g, dom);
    for (std::size_t k = 1; k < traj.energies.size(); ++k) {
      const double slack = (traj.energies[k] - traj.energies[k - 1]) / traj.energies[0];
      worst = std::max(worst, slack);
      if (slack > 1e-10) pass = false;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst per-step relative increase %.2e", worst);
  report(8, "uncontrolled sigma>0 energies non-increasing", pass, buf);
}

void criterion_duality() {
  const GridSpec g = grid_of(8, 50);
  DomainConfig dom;
  dom.sigma = 3.0;
  dom.horizon = 0.2;
  const SparseOperator A = assemble_system(g, dom);
  const SparseOperator B =
      assemble_control_injection(g, ControlRegion::make_rectangle(0.2, 1.6, -0.75, 0.5), dom);
  std::mt19937_64 rng(555);
  std::normal_distribution<double> gauss;
  double worst_dual = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    State z0 = State::zero(g), zT = State::zero(g);
    for (auto& v : z0.y) v = gauss(rng);
    for (auto& v : z0.h) v = gauss(rng);
    for (auto& v : zT.y) v = gauss(rng);
    for (auto& v : zT.h) v = gauss(rng);
    ControlField u = ControlField::zero(g.nt + 1, static_cast<int>(B.mat.cols()));
    for (auto& v : u.u) v = gauss(rng);
    worst_dual = std::max(worst_dual, duality_check(A, B, z0, u, zT, g, dom).relative_gap());
  }
  // Gramian symmetry through the same adjoint machinery
  const double dt = g.dt(dom);
  const double w = g.dx(dom) * g.dx(dom);
  CnStepper st(A.mat, dt);
  const int N = g.state_dim();
  auto gram = [&](const State& p) {
    const Trajectory adj = simulate_adjoint(A, p, g, dom);
    auto zvec = [&](const State& s) {
      return Eigen::Map<const Eigen::VectorXd>(s.flatten().data(), N).eval();
    };
    std::vector<Eigen::VectorXd> u(g.nt + 1);
    u[0] = B.mat.transpose() * zvec(adj.states[1]) / (2.0 * w);
    u[g.nt] = B.mat.transpose() * zvec(adj.states[g.nt]) / (2.0 * w);
    for (int j = 1; j < g.nt; ++j)
      u[j] = B.mat.transpose() * (zvec(adj.states[j]) + zvec(adj.states[j + 1])) / (4.0 * w);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < g.nt; ++k) z = st.step(z, B.mat * (u[k] + u[k + 1]));
    return (st.implicit_matrix() * z).eval();
  };
  double worst_sym = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    State p = State::zero(g), q = State::zero(g);
    for (auto& v : p.y) v = gauss(rng);
    for (auto& v : p.h) v = gauss(rng);
    for (auto& v : q.y) v = gauss(rng);
    for (auto& v : q.h) v = gauss(rng);
    const double a =
        gram(p).dot(Eigen::Map<const Eigen::VectorXd>(q.flatten().data(), N));
    const double b =
        gram(q).dot(Eigen::Map<const Eigen::VectorXd>(p.flatten().data(), N));
    worst_sym = std::max(worst_sym, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
  }
  const bool pass = worst_dual <= 1e-10 && worst_sym <= 1e-10;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "duality gap %.2e, Gramian symmetry gap %.2e", worst_dual,
                worst_sym);
  report(9, "discrete duality and Gramian symmetry at nx=8", pass, buf);
}

void criterion_decay() {
  const double r1 = decay_rate_check(4.0, 10.0, 0.4, DecayDatum::generic);
  const double r2 = decay_rate_check(4.0, 0.5, 0.4, DecayDatum::generic);
  const Spectrum sp = spectrum(4.0, 10.0, 1);
  const double r3 = decay_rate_check(4.0, 10.0, 0.4, DecayDatum::ground_eigen);
  const double relerr = std::abs((r3 - sp.pairs[0].lambda) / sp.pairs[0].lambda);
  const bool pass = r1 <= -16.0 * 0.9 && r2 <= -0.25 * 16.0 * 0.9 && relerr <= 0.05;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "rates %.2f / %.2f, eigen-rate err %.2f%%", r1, r2,
                100.0 * relerr);
  report(10, "per-mode uncontrolled decay rates", pass, buf);
}

void criterion_observability() {
  std::vector<double> ts;
  for (int i = 0; i < 6; ++i) ts.push_back(0.05 + 0.09 * i);
  const CostFit fit = observability_cost_sweep(1.0, 10.0, -0.5, 0.2, 12, ts);
  bool monotone = true;
  for (std::size_t i = 1; i < fit.table.size(); ++i)
    if (fit.table[i].K_est > fit.table[i - 1].K_est * (1.0 + 1e-10)) monotone = false;
  const bool pass = monotone && fit.r_squared >= 0.95;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "monotone=%d, fitted M=%.3g, R^2=%.4f", monotone ? 1 : 0, fit.M,
                fit.r_squared);
  report(11, "observability cost decreasing in T with exponential small-T fit", pass, buf);
}

void criterion_lr() {
  const GridSpec g = grid_of(12, 512);
  DomainConfig dom;
  dom.sigma = 10.0;
  dom.horizon = 0.5;
  LrOptions opt;
  opt.beta = 1.0;
  opt.J = 6;
  const ControlRegion rect = ControlRegion::make_rectangle(0.0, 2.0, -0.5, 0.2);
  const State z0 = preset_initial_data("fig_hum", g, dom);
  const LrResult res = lr_synthesize(z0, g, dom, rect, opt);
  // per-interval control norms eventually decreasing
  bool eventually_decreasing = false;
  for (std::size_t s = 0; s + 1 < res.intervals.size(); ++s) {
    bool dec = true;
    for (std::size_t j = s; j + 1 < res.intervals.size(); ++j)
      if (res.intervals[j + 1].control_norm > res.intervals[j].control_norm * (1.0 + 1e-12))
        dec = false;
    if (dec) {
      eventually_decreasing = true;
      break;
    }
  }
  const double rel = res.final_norm / res.initial_norm;
  const bool pass = rel <= 1e-4 && eventually_decreasing && res.replay_gap <= 1e-9;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "final %.2e relative, replay gap %.2e, tail decreasing=%d", rel,
                res.replay_gap, eventually_decreasing ? 1 : 0);
  report(12, "Lebeau-Robbiano synthesis at sigma=10, T=0.5, J=6", pass, buf);
}

}  // namespace

int main() {
  criterion_figure(1, 10.0);
  criterion_figure(2, 0.0);
  criterion_backend_agreement();
  criterion_spectral_suite();
  criterion_discrete_vs_analytic();
  criterion_eigenfunctions();
  criterion_series();
  criterion_energy();
  criterion_duality();
  criterion_decay();
  criterion_observability();
  criterion_lr();
  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
