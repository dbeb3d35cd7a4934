#include "stefan/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stefan {

namespace {
constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;
}  // namespace

ModeDecomposition dft_modes(const State& s, const GridSpec& grid) {
  if (!s.matches(grid)) throw std::invalid_argument("dft_modes: state/grid mismatch");
  const int ni = grid.horizontal_points();
  const int mv = grid.vertical();
  ModeDecomposition dec;
  dec.ni = ni;
  dec.mv = mv;
  dec.y.assign(ni, std::vector<cd>(mv, cd(0.0, 0.0)));
  dec.h.assign(ni, cd(0.0, 0.0));
  const double scale = 1.0 / std::sqrt(static_cast<double>(ni));
  std::vector<cd> tw(ni);
  for (int r = 0; r < ni; ++r) tw[r] = std::polar(1.0, -2.0 * kPi * r / ni);
  for (int n = 0; n < ni; ++n) {
    for (int i = 1; i <= ni; ++i) {
      const cd w = tw[static_cast<std::size_t>((static_cast<long long>(n) * (i - 1)) % ni)];
      dec.h[n] += w * s.h[i - 1];
      for (int j = 1; j <= mv; ++j) dec.y[n][j - 1] += w * s.y[grid.y_index(i, j)];
    }
    dec.h[n] *= scale;
    for (auto& v : dec.y[n]) v *= scale;
  }
  return dec;
}

State inverse_modes(const ModeDecomposition& dec, const GridSpec& grid) {
  const int ni = grid.horizontal_points();
  const int mv = grid.vertical();
  if (dec.ni != ni || dec.mv != mv) throw std::invalid_argument("inverse_modes: grid mismatch");
  State s = State::zero(grid);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ni));
  std::vector<cd> tw(ni);
  for (int r = 0; r < ni; ++r) tw[r] = std::polar(1.0, 2.0 * kPi * r / ni);
  for (int i = 1; i <= ni; ++i) {
    cd hh(0.0, 0.0);
    std::vector<cd> yy(mv, cd(0.0, 0.0));
    for (int n = 0; n < ni; ++n) {
      const cd w = tw[static_cast<std::size_t>((static_cast<long long>(n) * (i - 1)) % ni)];
      hh += w * dec.h[n];
      for (int j = 0; j < mv; ++j) yy[j] += w * dec.y[n][j];
    }
    s.h[i - 1] = scale * hh.real();
    for (int j = 1; j <= mv; ++j) s.y[grid.y_index(i, j)] = scale * yy[j - 1].real();
  }
  return s;
}

double weighted_inner(const State& a, const State& b, double sigma, double dx) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.y.size(); ++i) acc += a.y[i] * b.y[i];
  acc *= dx * dx;
  double hl2 = 0.0, hd = 0.0;
  const int n = static_cast<int>(a.h.size());
  for (int i = 0; i < n; ++i) {
    hl2 += a.h[i] * b.h[i];
    const double da = a.h[(i + 1) % n] - a.h[i];
    const double db = b.h[(i + 1) % n] - b.h[i];
    hd += da * db;
  }
  return acc + dx * hl2 + sigma / dx * hd;
}

double weighted_norm(const State& a, double sigma, double dx) {
  return std::sqrt(std::max(weighted_inner(a, a, sigma, dx), 0.0));
}

State project_low(const State& s, double mu, const GridSpec& grid) {
  if (mu < 0.0) throw std::invalid_argument("project_low: mu must be >= 0");
  ModeDecomposition dec = dft_modes(s, grid);
  for (int n = 0; n < dec.ni; ++n) {
    if (dec.alias(n) > mu) {
      dec.h[n] = cd(0.0, 0.0);
      std::fill(dec.y[n].begin(), dec.y[n].end(), cd(0.0, 0.0));
    }
  }
  return inverse_modes(dec, grid);
}

namespace {

double offmode_mass(const ModeDecomposition& dec, int keep) {
  double on = 0.0, off = 0.0;
  for (int n = 0; n < dec.ni; ++n) {
    double m = std::norm(dec.h[n]);
    for (const cd& v : dec.y[n]) m += std::norm(v);
    if (dec.alias(n) == keep)
      on += m;
    else
      off += m;
  }
  return (on + off) > 0.0 ? std::sqrt(off / (on + off)) : 0.0;
}

}  // namespace

ModeInvarianceReport mode_invariance_check(const GridSpec& grid, const DomainConfig& dom,
                                           unsigned seed) {
  const SparseOperator A = assemble_system(grid, dom);
  ModeInvarianceReport rep;
  for (int n : {0, 1, std::min(5, grid.horizontal_points() / 2)}) {
    const State z = preset_single_mode(n, 1, grid, dom);
    const Eigen::VectorXd zv =
        Eigen::Map<const Eigen::VectorXd>(z.flatten().data(), grid.state_dim());
    std::vector<double> av(grid.state_dim());
    Eigen::Map<Eigen::VectorXd>(av.data(), grid.state_dim()) = A.mat * zv;
    const ModeDecomposition dec = dft_modes(State::unflatten(av, grid), grid);
    rep.max_offmode_leak = std::max(rep.max_offmode_leak, offmode_mass(dec, n));
  }
  // commutator on random data
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  State z = State::zero(grid);
  for (auto& v : z.y) v = gauss(rng);
  for (auto& v : z.h) v = gauss(rng);
  const double mu = grid.horizontal_points() / 4.0;
  auto applyA = [&](const State& s) {
    const std::vector<double> f = s.flatten();
    const Eigen::VectorXd r =
        A.mat * Eigen::Map<const Eigen::VectorXd>(f.data(), grid.state_dim());
    std::vector<double> rv(r.data(), r.data() + r.size());
    return State::unflatten(rv, grid);
  };
  const State lhs = applyA(project_low(z, mu, grid));
  const State rhs = project_low(applyA(z), mu, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lhs.y.size(); ++i) {
    num += (lhs.y[i] - rhs.y[i]) * (lhs.y[i] - rhs.y[i]);
    den += rhs.y[i] * rhs.y[i];
  }
  for (std::size_t i = 0; i < lhs.h.size(); ++i) {
    num += (lhs.h[i] - rhs.h[i]) * (lhs.h[i] - rhs.h[i]);
    den += rhs.h[i] * rhs.h[i];
  }
  rep.commutator_norm = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return rep;
}

double decay_rate_check(double n, double sigma, double T_obs, DecayDatum datum, int m,
                        unsigned seed) {
  if (n == 0.0) throw std::invalid_argument("decay_rate_check: n must be nonzero");
  auto [A, w] = assemble_mode_operator(n * n, sigma, m);
  const int N = m + 1;
  Eigen::VectorXd z0(N);
  if (datum == DecayDatum::generic) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < N; ++i) z0[i] = gauss(rng);
  } else {
    const Spectrum spec = spectrum(n, sigma, 1);
    const EigenPair& p = spec.pairs.front();
    const double d = 2.0 / (m + 1);
    for (int j = 1; j <= m; ++j) z0[j - 1] = p.phi(-1.0 + j * d);
    z0[m] = p.h_component();
  }
  auto wnorm = [&](const Eigen::VectorXd& v) { return w.norm(v); };
  double T = T_obs;
  for (int attempt = 0; attempt < 30; ++attempt) {
    const int nt = 2000;
    CnStepper st(A.mat, T / nt);
    Eigen::VectorXd z = z0;
    bool under = false;
    for (int k = 0; k < nt; ++k) {
      z = st.step_free(z);
      if (wnorm(z) < 1e-280 * wnorm(z0)) {
        under = true;
        break;
      }
    }
    if (!under) return std::log(wnorm(z) / wnorm(z0)) / T;
    T /= 2.0;
  }
  throw std::runtime_error("decay_rate_check: norm underflow could not be avoided");
}

DyadicSchedule DyadicSchedule::build(double T, double beta, int J, int nt_total) {
  if (!(T > 0.0) || !(beta > 0.0) || J < 1)
    throw std::invalid_argument("DyadicSchedule: need T>0, beta>0, J>=1");
  const int align = 1 << (J + 1);
  if (nt_total <= 0 || nt_total % align != 0)
    throw std::invalid_argument("DyadicSchedule: nt_total must be a positive multiple of 2^{J+1}");
  DyadicSchedule s;
  s.T = T;
  s.beta = beta;
  s.J = J;
  s.nt_total = nt_total;
  s.tau.push_back(0.0);
  s.step_of_tau.push_back(0);
  int step = 0;
  for (int j = 1; j <= J; ++j) {
    step += nt_total >> j;  // T_j = 2^{-j} T on the uniform grid
    s.tau.push_back(T * step / nt_total);
    s.step_of_tau.push_back(step);
    s.mu.push_back(std::ldexp(beta, j));  // 2^j beta
  }
  return s;
}

namespace {

struct RectangleFootprint {
  std::vector<int> window_js;  ///< vertical node indices inside (c,d)
  std::vector<int> node_set;   ///< flattened y indices, as region_nodes orders them
};

RectangleFootprint full_width_footprint(const ControlRegion& region, const GridSpec& grid,
                                        const DomainConfig& dom) {
  if (region.kind != ControlRegion::Kind::rectangle)
    throw std::invalid_argument("lr_synthesize: control region must be a rectangle");
  RectangleFootprint fp;
  fp.node_set = region_nodes(region, grid, dom);
  for (int j = 1; j <= grid.vertical(); ++j) {
    const double x2 = grid.x2(j, dom);
    if (x2 >= region.c - 1e-12 && x2 <= region.d + 1e-12) fp.window_js.push_back(j);
  }
  const std::size_t expect =
      fp.window_js.size() * static_cast<std::size_t>(grid.horizontal_points());
  if (fp.node_set.size() != expect)
    throw std::invalid_argument(
        "lr_synthesize: rectangle must span the full horizontal period (per-mode programs "
        "need horizontally invariant support)");
  return fp;
}

}  // namespace

LrResult lr_synthesize(const State& z0, const GridSpec& grid, const DomainConfig& dom,
                       const ControlRegion& region, const LrOptions& opt) {
  if (!(dom.sigma > 0.0))
    throw std::invalid_argument("lr_synthesize: requires sigma > 0 (high-frequency decay)");
  const RectangleFootprint fp = full_width_footprint(region, grid, dom);
  const int ni = grid.horizontal_points();
  const int mv = grid.vertical();
  const double dx = grid.dx(dom);
  const double T = dom.horizon;

  int nt_total = opt.nt_total;
  const int align = 1 << (opt.J + 1);
  if (nt_total <= 0) nt_total = std::max(16 << opt.J, ((grid.nt + align - 1) / align) * align);
  if (nt_total % align != 0) nt_total = ((nt_total + align - 1) / align) * align;

  LrResult out;
  out.schedule = DyadicSchedule::build(T, opt.beta, opt.J, nt_total);
  out.region_node_set = fp.node_set;
  const double dt = T / nt_total;
  const int qv = static_cast<int>(fp.window_js.size());
  out.u = ControlField::zero(nt_total + 1, static_cast<int>(fp.node_set.size()));

  // slot of node (i, j) inside the region's (sorted, j-major) node list
  auto slot = [&](int i, int jpos) { return jpos * ni + (i - 1); };

  // per-mode blocks and steppers (shared across intervals: uniform dt)
  const int reps = ni / 2;  // representative modes 0..reps (+ Nyquist if even)
  std::vector<Eigen::SparseMatrix<double>> blocks;
  std::vector<std::unique_ptr<CnStepper>> steppers;
  Eigen::SparseMatrix<double> Bv(mv + 1, qv);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int s = 0; s < qv; ++s) trip.emplace_back(fp.window_js[s] - 1, s, 1.0);
    Bv.setFromTriplets(trip.begin(), trip.end());
  }
  const int nmodes = (ni % 2 == 0) ? reps + 1 : reps + 1;  // 0..reps
  for (int n = 0; n < nmodes; ++n) {
    auto [Aop, metric] = assemble_mode_operator(mode_symbol(n, grid, dom), dom.sigma, mv);
    blocks.push_back(Aop.mat);
    steppers.push_back(std::make_unique<CnStepper>(blocks.back(), dt));
  }

  // complex mode states, representative half-spectrum
  ModeDecomposition dec = dft_modes(z0, grid);
  out.initial_norm = weighted_norm(z0, dom.sigma, dx);
  const double z0_scale = out.initial_norm > 0.0 ? out.initial_norm : 1.0;

  auto mode_vec = [&](int n, bool imag) {
    Eigen::VectorXd v(mv + 1);
    for (int j = 0; j < mv; ++j) v[j] = imag ? dec.y[n][j].imag() : dec.y[n][j].real();
    v[mv] = imag ? dec.h[n].imag() : dec.h[n].real();
    return v;
  };
  auto store_mode = [&](int n, const Eigen::VectorXd& re, const Eigen::VectorXd& im) {
    for (int j = 0; j < mv; ++j) dec.y[n][j] = cd(re[j], im[j]);
    dec.h[n] = cd(re[mv], im[mv]);
    if (n != 0 && 2 * n != ni) {  // conjugate mirror
      const int nm = ni - n;
      for (int j = 0; j < mv; ++j) dec.y[nm][j] = std::conj(dec.y[n][j]);
      dec.h[nm] = std::conj(dec.h[n]);
    }
  };
  auto snapshot = [&]() { return inverse_modes(dec, grid); };

  int step_cursor = 0;
  for (int j = 1; j <= opt.J; ++j) {
    const double mu_j = out.schedule.mu[static_cast<std::size_t>(j - 1)];
    const int steps_j = nt_total >> j;
    const int half = steps_j / 2;
    const int k0 = step_cursor;

    // controlled half: null every mode with alias <= mu_j
    double interval_ctrl_sq = 0.0;
    for (int n = 0; n < nmodes; ++n) {
      const bool controlled = (n <= mu_j);
      std::vector<Eigen::VectorXd> u_re(half + 1, Eigen::VectorXd::Zero(qv));
      std::vector<Eigen::VectorXd> u_im(half + 1, Eigen::VectorXd::Zero(qv));
      if (controlled) {
        CnKktSolver::Options kopt;
        kopt.spatial_weight = dx * dx;  // 2D quadrature weight per node
        kopt.zero_first_slice = true;   // boundary slices stay zero so the
        kopt.zero_last_slice = true;    // pasted field is step-consistent
        CnKktSolver kkt(blocks[static_cast<std::size_t>(n)], Bv, dt, half, kopt);
        CnKktSolver::Result r1 = kkt.solve(mode_vec(n, false));
        u_re = std::move(r1.u);
        if (n != 0 && 2 * n != ni) {
          CnKktSolver::Result r2 = kkt.solve(mode_vec(n, true));
          u_im = std::move(r2.u);
        }
      }
      // advance the mode through the controlled half
      Eigen::VectorXd zre = mode_vec(n, false), zim = mode_vec(n, true);
      for (int k = 0; k < half; ++k) {
        zre = steppers[static_cast<std::size_t>(n)]->step(zre, Bv * (u_re[k] + u_re[k + 1]));
        zim = steppers[static_cast<std::size_t>(n)]->step(zim, Bv * (u_im[k] + u_im[k + 1]));
      }
      store_mode(n, zre, zim);
      // accumulate the physical control: mode pair carries weight 2 (mirror)
      const double pair_w = (n == 0 || 2 * n == ni) ? 1.0 : 2.0;
      for (int k = 0; k <= half; ++k)
        interval_ctrl_sq += ((k == 0 || k == half) ? 0.5 : 1.0) * dt * dx * dx * pair_w *
                            (u_re[k].squaredNorm() + u_im[k].squaredNorm());
      // write nodal values of this mode's lifted control into the global field
      for (int k = 0; k <= half; ++k) {
        if (u_re[k].isZero(0.0) && u_im[k].isZero(0.0)) continue;
        const int gk = k0 + k;
        for (int s = 0; s < qv; ++s) {
          const cd coef(u_re[k][s], u_im[k][s]);
          if (coef == cd(0.0, 0.0)) continue;
          for (int i = 1; i <= ni; ++i) {
            const cd w = std::polar(1.0 / std::sqrt(static_cast<double>(ni)),
                                    2.0 * kPi * n * (i - 1) / ni);
            double val = (w * coef).real();
            if (n != 0 && 2 * n != ni) val *= 2.0;  // conjugate mirror folded in
            out.u.slice(gk)[slot(i, s)] += val;
          }
        }
      }
    }

    // low-mode residual right after the controlled half
    {
      State mid = snapshot();
      const State low = project_low(mid, mu_j, grid);
      LrIntervalReport rep;
      rep.j = j;
      rep.T_j = T * steps_j / nt_total;
      rep.mu_j = mu_j;
      rep.control_norm = std::sqrt(interval_ctrl_sq);
      rep.mid_lowmode_residual = weighted_norm(low, dom.sigma, dx) / z0_scale;
      out.intervals.push_back(rep);
    }

    // free half
    for (int n = 0; n < nmodes; ++n) {
      Eigen::VectorXd zre = mode_vec(n, false), zim = mode_vec(n, true);
      for (int k = 0; k < half; ++k) {
        zre = steppers[static_cast<std::size_t>(n)]->step_free(zre);
        zim = steppers[static_cast<std::size_t>(n)]->step_free(zim);
      }
      store_mode(n, zre, zim);
    }
    step_cursor += steps_j;
    State end = snapshot();
    out.intervals.back().end_state_norm = weighted_norm(end, dom.sigma, dx);
    out.recorded_states.push_back(std::move(end));
  }

  // trailing segment (tau_J, T): free decay
  if (step_cursor < nt_total) {
    const int rest = nt_total - step_cursor;
    for (int n = 0; n < nmodes; ++n) {
      Eigen::VectorXd zre = mode_vec(n, false), zim = mode_vec(n, true);
      for (int k = 0; k < rest; ++k) {
        zre = steppers[static_cast<std::size_t>(n)]->step_free(zre);
        zim = steppers[static_cast<std::size_t>(n)]->step_free(zim);
      }
      store_mode(n, zre, zim);
    }
    step_cursor = nt_total;
  }
  State final_state = snapshot();
  out.final_norm = weighted_norm(final_state, dom.sigma, dx);
  out.recorded_states.push_back(final_state);

  double total_sq = 0.0;
  for (const LrIntervalReport& r : out.intervals) total_sq += r.control_norm * r.control_norm;
  out.total_control_norm = std::sqrt(total_sq);

  // replay through the monolithic simulator and compare the recorded states
  {
    const SparseOperator A = assemble_system(grid, dom);
    SparseOperator B;
    B.mat.resize(grid.state_dim(), static_cast<int>(fp.node_set.size()));
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t s = 0; s < fp.node_set.size(); ++s)
      trip.emplace_back(fp.node_set[s], static_cast<int>(s), 1.0);
    B.mat.setFromTriplets(trip.begin(), trip.end());
    GridSpec g2 = grid;
    g2.nt = nt_total;
    const Trajectory traj = simulate(A, B, z0, out.u, g2, dom);
    double worst = 0.0;
    for (int j = 1; j <= opt.J; ++j) {
      const State& rec = out.recorded_states[static_cast<std::size_t>(j - 1)];
      const State& sim = traj.states[static_cast<std::size_t>(
          out.schedule.step_of_tau[static_cast<std::size_t>(j)])];
      State diff = rec;
      for (std::size_t i = 0; i < diff.y.size(); ++i) diff.y[i] -= sim.y[i];
      for (std::size_t i = 0; i < diff.h.size(); ++i) diff.h[i] -= sim.h[i];
      worst = std::max(worst, weighted_norm(diff, dom.sigma, dx) / z0_scale);
    }
    {
      const State& rec = out.recorded_states.back();
      const State& sim = traj.states.back();
      State diff = rec;
      for (std::size_t i = 0; i < diff.y.size(); ++i) diff.y[i] -= sim.y[i];
      for (std::size_t i = 0; i < diff.h.size(); ++i) diff.h[i] -= sim.h[i];
      worst = std::max(worst, weighted_norm(diff, dom.sigma, dx) / z0_scale);
    }
    out.replay_gap = worst;
  }
  return out;
}

}  // namespace stefan
