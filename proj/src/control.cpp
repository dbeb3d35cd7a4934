#include "stefan/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace stefan {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd state_to_vec(const State& s) {
  const std::vector<double> f = s.flatten();
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<int>(f.size()));
}
}  // namespace

std::string to_string(Backend b) { return b == Backend::kkt ? "kkt" : "gramian_cg"; }

// ---------------------------------------------------------------------------
// CnKktSolver: block-tridiagonal factorization of the time-structured KKT
// ---------------------------------------------------------------------------

CnKktSolver::CnKktSolver(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                         double dt, int nt, Options opt)
    : N_(static_cast<int>(A.rows())), q_(static_cast<int>(B.cols())), nt_(nt), dt_(dt), opt_(opt) {
  if (nt < 1) throw std::invalid_argument("CnKktSolver: nt must be >= 1");
  if ((opt_.zero_first_slice || opt_.zero_last_slice) && nt < 2)
    throw std::invalid_argument("CnKktSolver: pinned boundary slices need nt >= 2");
  if (B.rows() != A.rows()) throw std::invalid_argument("CnKktSolver: A/B dimension mismatch");
  B_ = B;
  Eigen::SparseMatrix<double> I(N_, N_);
  I.setIdentity();
  Mm_ = I - (dt / 2.0) * A;
  Mp_ = I + (dt / 2.0) * A;
  Mm_.makeCompressed();
  Mp_.makeCompressed();

  // Stage k bundles (u^k, z^k, p_k); pinned boundary slices drop their u.
  const int last = opt_.zero_last_slice ? nt_ - 1 : nt_;
  stages_.assign(static_cast<std::size_t>(last) + 1, Stage{});
  int running = 0;
  for (int k = 0; k <= last; ++k) {
    Stage& st = stages_[static_cast<std::size_t>(k)];
    st.has_u = !(k == 0 && opt_.zero_first_slice);
    st.has_z = (k >= 1 && k <= nt_ - 1);
    st.has_p = (k <= nt_ - 1);
    int off = 0;
    if (st.has_u) { st.off_u = off; off += q_; }
    if (st.has_z) { st.off_z = off; off += N_; }
    if (st.has_p) { st.off_p = off; off += N_; }
    st.dim = off;
    st.offset = running;
    running += off;
  }
  total_dim_ = running;

  const double beta = dt_ / 2.0;
  auto theta = [&](int k) { return (k == 0 || k == nt_) ? 0.5 : 1.0; };

  const int nstage = static_cast<int>(stages_.size());
  D_.resize(nstage);
  U_.resize(nstage > 1 ? nstage - 1 : 0);
  std::vector<Eigen::Triplet<double>> trip;
  auto add_sparse = [&trip](int r0, int c0, const Eigen::SparseMatrix<double>& M, double scale) {
    for (int c = 0; c < M.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it)
        trip.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()),
                          scale * it.value());
  };
  auto add_sparse_T = [&trip](int r0, int c0, const Eigen::SparseMatrix<double>& M, double scale) {
    for (int c = 0; c < M.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it)
        trip.emplace_back(r0 + static_cast<int>(it.col()), c0 + static_cast<int>(it.row()),
                          scale * it.value());
  };

  for (int k = 0; k < nstage; ++k) {
    const Stage& st = stages_[static_cast<std::size_t>(k)];
    trip.clear();
    if (st.has_u)
      for (int s = 0; s < q_; ++s)
        trip.emplace_back(st.off_u + s, st.off_u + s, 2.0 * theta(k) * dt_ * opt_.spatial_weight);
    if (st.has_p) {
      if (st.has_u) {
        add_sparse_T(st.off_u, st.off_p, B_, -beta);  // stat_u^k vs p_k
        add_sparse(st.off_p, st.off_u, B_, -beta);    // g_k vs u^k
      }
      if (st.has_z) {
        add_sparse_T(st.off_z, st.off_p, Mp_, -1.0);  // stat_z^k vs p_k
        add_sparse(st.off_p, st.off_z, Mp_, -1.0);    // g_k vs z^k
      }
    }
    D_[k].resize(st.dim, st.dim);
    D_[k].setFromTriplets(trip.begin(), trip.end());
    D_[k].makeCompressed();

    if (k + 1 < nstage) {
      // Cross-stage couplings all stem from g_k: -beta B on u^{k+1} and Mm on
      // z^{k+1}; the symmetric partners (stat_u^{k+1} and stat_z^{k+1} vs p_k)
      // live in L_{k+1} = U_k^T.
      const Stage& nx = stages_[static_cast<std::size_t>(k + 1)];
      trip.clear();
      if (st.has_p) {
        if (nx.has_u) add_sparse(st.off_p, nx.off_u, B_, -beta);
        if (nx.has_z) add_sparse(st.off_p, nx.off_z, Mm_, 1.0);
      }
      U_[k].resize(st.dim, nx.dim);
      U_[k].setFromTriplets(trip.begin(), trip.end());
      U_[k].makeCompressed();
    }
  }

  // Block-tridiagonal elimination from the last stage down: the trailing
  // pivot carries the positive definite control Hessian, and every Schur
  // complement S_k = D_k - U_k S_{k+1}^{-1} U_k^T stays invertible, which the
  // forward order does not guarantee (D_0 alone is structurally singular).
  lu_.resize(nstage);
  lu_[static_cast<std::size_t>(nstage - 1)].compute(Eigen::MatrixXd(D_[nstage - 1]));
  for (int k = nstage - 2; k >= 0; --k) {
    Eigen::MatrixXd Ut = Eigen::MatrixXd(U_[k]).transpose();
    Eigen::MatrixXd V = lu_[static_cast<std::size_t>(k + 1)].solve(Ut);
    Eigen::MatrixXd Sk = Eigen::MatrixXd(D_[k]) - Eigen::MatrixXd(U_[k] * V);
    lu_[static_cast<std::size_t>(k)].compute(Sk);
  }
}

Eigen::VectorXd CnKktSolver::apply_kkt(const Eigen::VectorXd& x) const {
  const int nstage = static_cast<int>(stages_.size());
  Eigen::VectorXd out(total_dim_);
  for (int k = 0; k < nstage; ++k) {
    const Stage& st = stages_[static_cast<std::size_t>(k)];
    Eigen::VectorXd seg = D_[k] * x.segment(st.offset, st.dim);
    if (k + 1 < nstage) {
      const Stage& nx = stages_[static_cast<std::size_t>(k + 1)];
      seg += U_[k] * x.segment(nx.offset, nx.dim);
    }
    if (k >= 1) {
      const Stage& pv = stages_[static_cast<std::size_t>(k - 1)];
      seg += U_[k - 1].transpose() * x.segment(pv.offset, pv.dim);
    }
    out.segment(st.offset, st.dim) = seg;
  }
  return out;
}

Eigen::VectorXd CnKktSolver::solve_factored(const Eigen::VectorXd& rhs) const {
  const int nstage = static_cast<int>(stages_.size());
  std::vector<Eigen::VectorXd> g(static_cast<std::size_t>(nstage));
  g[static_cast<std::size_t>(nstage - 1)] =
      rhs.segment(stages_.back().offset, stages_.back().dim);
  for (int k = nstage - 2; k >= 0; --k) {
    const Stage& st = stages_[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(k)] =
        rhs.segment(st.offset, st.dim) -
        U_[k] * lu_[static_cast<std::size_t>(k + 1)].solve(g[static_cast<std::size_t>(k + 1)]);
  }
  Eigen::VectorXd x(total_dim_);
  x.segment(stages_[0].offset, stages_[0].dim) = lu_[0].solve(g[0]);
  for (int k = 1; k < nstage; ++k) {
    const Stage& st = stages_[static_cast<std::size_t>(k)];
    const Stage& pv = stages_[static_cast<std::size_t>(k - 1)];
    x.segment(st.offset, st.dim) = lu_[static_cast<std::size_t>(k)].solve(
        g[static_cast<std::size_t>(k)] - U_[k - 1].transpose() * x.segment(pv.offset, pv.dim));
  }
  return x;
}

CnKktSolver::Result CnKktSolver::solve(const Eigen::VectorXd& z0) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total_dim_);
  rhs.segment(stages_[0].offset + stages_[0].off_p, N_) = Mp_ * z0;  // g_0 row

  Eigen::VectorXd x = solve_factored(rhs);
  const double scale = rhs.norm();
  double rel = 0.0;
  for (int pass = 0; pass < opt_.refine_steps; ++pass) {
    Eigen::VectorXd r = rhs - apply_kkt(x);
    rel = (scale > 0.0) ? r.norm() / scale : 0.0;
    if (rel <= 1e-14) break;
    x += solve_factored(r);
  }
  Eigen::VectorXd r = rhs - apply_kkt(x);
  rel = (scale > 0.0) ? r.norm() / scale : 0.0;

  Result res;
  res.kkt_residual = rel;
  res.u.assign(static_cast<std::size_t>(nt_) + 1, Eigen::VectorXd::Zero(q_));
  double stat = 0.0;
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const Stage& st = stages_[k];
    if (!st.has_u) continue;
    res.u[k] = x.segment(st.offset + st.off_u, q_);
    stat = std::max(stat, r.segment(st.offset + st.off_u, q_).norm());
  }
  res.stationarity_residual = (scale > 0.0) ? stat / scale : 0.0;
  double obj = 0.0;
  for (int k = 0; k <= nt_; ++k) {
    const double th = (k == 0 || k == nt_) ? 0.5 : 1.0;
    obj += th * dt_ * opt_.spatial_weight * res.u[static_cast<std::size_t>(k)].squaredNorm();
  }
  res.objective = obj;
  return res;
}

// ---------------------------------------------------------------------------
// Full-system backends
// ---------------------------------------------------------------------------

namespace {

struct ForwardRun {
  Eigen::VectorXd terminal;
};

ForwardRun forward_terminal(const CnStepper& st, const Eigen::SparseMatrix<double>& B,
                            const Eigen::VectorXd& z0, const std::vector<Eigen::VectorXd>& u) {
  Eigen::VectorXd z = z0;
  const int nt = static_cast<int>(u.size()) - 1;
  for (int k = 0; k < nt; ++k) z = st.step(z, B * (u[k] + u[k + 1]));
  return {z};
}

ControlField to_control_field(const std::vector<Eigen::VectorXd>& u) {
  ControlField f = ControlField::zero(static_cast<int>(u.size()),
                                      static_cast<int>(u.empty() ? 0 : u[0].size()));
  for (std::size_t k = 0; k < u.size(); ++k)
    for (int s = 0; s < u[k].size(); ++s) f.slice(static_cast<int>(k))[s] = u[k][s];
  return f;
}

std::vector<double> omega_series(const std::vector<Eigen::VectorXd>& u, double w_sp) {
  std::vector<double> out;
  out.reserve(u.size());
  for (const auto& s : u) out.push_back(std::sqrt(w_sp) * s.norm());
  return out;
}

}  // namespace

ControlSolution solve_minimal_norm_control(const SparseOperator& A, const SparseOperator& B,
                                           const State& z0, const GridSpec& grid,
                                           const DomainConfig& dom, Backend backend, double tol) {
  const double dt = grid.dt(dom);
  const double dx = grid.dx(dom);
  const double w_sp = dx * dx;
  const int nt = grid.nt;
  const Eigen::VectorXd z0v = state_to_vec(z0);
  const double z0_scale = state_norm(z0, dom.sigma, dx);

  ControlSolution sol;
  sol.backend = backend;
  CnStepper stepper(A.mat, dt);

  std::vector<Eigen::VectorXd> u;
  if (z0_scale == 0.0) {
    u.assign(nt + 1, Eigen::VectorXd::Zero(B.mat.cols()));
    sol.converged = true;
  } else if (backend == Backend::kkt) {
    CnKktSolver::Options opt;
    opt.spatial_weight = w_sp;
    CnKktSolver kkt(A.mat, B.mat, dt, nt, opt);
    CnKktSolver::Result res = kkt.solve(z0v);
    u = std::move(res.u);
    sol.residual = res.stationarity_residual;
    sol.iterations = 1;
    sol.converged = res.kkt_residual <= 1e-8;
  } else {
    // epsilon-penalized HUM operator, matrix-free CG. Work on the normalized
    // datum so the epsilon sweep is scale-free.
    Eigen::SparseMatrix<double> At = A.mat.transpose();
    CnStepper adj(At, dt);
    const int q = static_cast<int>(B.mat.cols());
    const int N = static_cast<int>(A.mat.rows());
    auto controls_from = [&](const Eigen::VectorXd& rho) {
      std::vector<Eigen::VectorXd> p(nt);
      p[nt - 1] = rho;
      for (int k = nt - 1; k > 0; --k) p[k - 1] = adj.step_free(p[k]);
      std::vector<Eigen::VectorXd> uu(nt + 1);
      uu[0] = B.mat.transpose() * p[0] / (2.0 * w_sp);
      uu[nt] = B.mat.transpose() * p[nt - 1] / (2.0 * w_sp);
      for (int j = 1; j < nt; ++j)
        uu[j] = B.mat.transpose() * (p[j - 1] + p[j]) / (4.0 * w_sp);
      return uu;
    };
    auto gram_apply = [&](const Eigen::VectorXd& rho) {
      const std::vector<Eigen::VectorXd> uu = controls_from(rho);
      Eigen::VectorXd zT = forward_terminal(stepper, B.mat, Eigen::VectorXd::Zero(N), uu).terminal;
      return Eigen::VectorXd(stepper.implicit_matrix() * zT);
    };
    const Eigen::VectorXd z0n = z0v / z0_scale;
    const Eigen::VectorXd zfree =
        forward_terminal(stepper, B.mat, z0n, std::vector<Eigen::VectorXd>(nt + 1, Eigen::VectorXd::Zero(q))).terminal;
    const Eigen::VectorXd b = -(stepper.implicit_matrix() * zfree);

    double eps = 1e-4;
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(N);
    int total_it = 0;
    bool ok = false;
    for (int sweep = 0; sweep < 14; ++sweep) {
      // CG on (eps I + G) rho = b, warm-started
      Eigen::VectorXd r = b - (eps * rho + gram_apply(rho));
      Eigen::VectorXd pdir = r;
      double rs = r.squaredNorm();
      const double btol = 1e-12 * b.norm();
      const int cap = 40 * N;
      for (int it = 0; it < cap; ++it) {
        if (std::sqrt(rs) <= btol) break;
        Eigen::VectorXd Ap = eps * pdir + gram_apply(pdir);
        const double al = rs / pdir.dot(Ap);
        rho += al * pdir;
        r -= al * Ap;
        const double rs2 = r.squaredNorm();
        pdir = r + (rs2 / rs) * pdir;
        rs = rs2;
        ++total_it;
      }
      const std::vector<Eigen::VectorXd> uu = controls_from(rho);
      const Eigen::VectorXd zT = forward_terminal(stepper, B.mat, z0n, uu).terminal;
      sol.residual = std::sqrt(rs) / std::max(b.norm(), 1e-300);
      double obj_eps = 0.0;
      for (int k = 0; k <= nt; ++k) {
        const double th = (k == 0 || k == nt) ? 0.5 : 1.0;
        obj_eps += th * dt * w_sp * uu[static_cast<std::size_t>(k)].squaredNorm();
      }
      sol.sweep_log.push_back({eps, z0_scale * std::sqrt(obj_eps), zT.norm()});
      if (zT.norm() <= tol) {
        ok = true;
        break;
      }
      eps /= 10.0;
    }
    sol.epsilon = eps;
    sol.iterations = total_it;
    sol.converged = ok;
    u = controls_from(rho);
    for (auto& s : u) s *= z0_scale;  // undo normalization
  }

  const Eigen::VectorXd zT = forward_terminal(stepper, B.mat, z0v, u).terminal;
  std::vector<double> zTv(zT.data(), zT.data() + zT.size());
  sol.terminal = State::unflatten(zTv, grid);
  sol.terminal_y_norm = y_l2_norm(sol.terminal, dx);
  sol.terminal_h_norm = h_norm(sol.terminal, dom.sigma, dx);
  double obj = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const double th = (k == 0 || k == nt) ? 0.5 : 1.0;
    obj += th * dt * w_sp * u[k].squaredNorm();
  }
  sol.control_norm = std::sqrt(obj);
  sol.omega_norm_series = omega_series(u, w_sp);
  sol.u = to_control_field(u);
  return sol;
}

double backend_agreement(const SparseOperator& A, const SparseOperator& B, const State& z0,
                         const GridSpec& grid, const DomainConfig& dom, double tol) {
  const ControlSolution a = solve_minimal_norm_control(A, B, z0, grid, dom, Backend::kkt, tol);
  const ControlSolution b = solve_minimal_norm_control(A, B, z0, grid, dom, Backend::gramian_cg, tol);
  if (a.control_norm == 0.0 && b.control_norm == 0.0) return 0.0;
  return std::abs(a.control_norm - b.control_norm) / a.control_norm;
}

// ---------------------------------------------------------------------------
// Analytic per-frequency control and observability costs
// ---------------------------------------------------------------------------

double exp_time_integral(double mu, double T) {
  const double x = mu * T;
  if (std::abs(x) < 1e-6) return T * (1.0 + x / 2.0 + x * x / 6.0);
  return (std::exp(x) - 1.0) / mu;
}

namespace {

int default_truncation(const Spectrum& spec, double T) {
  // smallest K whose tail already decayed through e^{2 lambda T} < 1e-16
  const double cut = -0.5 * 16.0 * std::log(10.0) / T;  // lambda < cut
  int K = 0;
  for (const EigenPair& p : spec.pairs) {
    ++K;
    if (K >= 4 && p.lambda < cut) break;
  }
  return std::max(K, 4);
}

Eigen::MatrixXd gramian_matrix(const std::vector<EigenPair>& basis, double T, double c, double d) {
  const int K = static_cast<int>(basis.size());
  Eigen::MatrixXd G(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = k; l < K; ++l) {
      const double P = window_product(basis[k], basis[l], c, d);
      const double v = exp_time_integral(basis[k].lambda + basis[l].lambda, T) * P;
      G(k, l) = v;
      G(l, k) = v;
    }
  return G;
}

}  // namespace

ModeControl per_frequency_control(double n, const std::vector<double>& datum_coeffs, double T,
                                  double c, double d, double sigma, int K) {
  if (!(T > 0.0)) throw std::invalid_argument("per_frequency_control: T must be > 0");
  Spectrum spec = spectrum(n, sigma, K > 0 ? K : 64);
  if (K <= 0) {
    const int Kd = default_truncation(spec, T);
    spec.pairs.resize(static_cast<std::size_t>(std::min<int>(Kd, 64)));
  }
  const int Ke = static_cast<int>(spec.pairs.size());

  ModeControl mc;
  mc.n = n;
  mc.sigma = sigma;
  mc.T = T;
  mc.c = c;
  mc.d = d;
  mc.K = Ke;
  mc.basis = spec.pairs;

  Eigen::MatrixXd G = gramian_matrix(spec.pairs, T, c, d);
  Eigen::VectorXd rhs(Ke);
  for (int k = 0; k < Ke; ++k) {
    const double a0 = k < static_cast<int>(datum_coeffs.size()) ? datum_coeffs[k] : 0.0;
    rhs[k] = -std::exp(spec.pairs[k].lambda * T) * a0;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  mc.gram_condition_estimate = (emin > 0.0) ? emax / emin : std::numeric_limits<double>::infinity();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
  Eigen::VectorXd a = lu.solve(rhs);
  for (int pass = 0; pass < 4; ++pass) {
    Eigen::VectorXd r = rhs - G * a;
    a += lu.solve(r);
  }
  mc.coeffs.assign(a.data(), a.data() + a.size());
  mc.max_terminal_coeff = (G * a - rhs).cwiseAbs().maxCoeff();
  mc.control_norm = std::sqrt(std::max(a.dot(G * a), 0.0));
  return mc;
}

double ModeControl::evaluate(double t, double x2) const {
  if (x2 < c || x2 > d) return 0.0;
  double v = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k)
    v += coeffs[k] * std::exp(basis[k].lambda * (T - t)) * basis[k].phi(x2);
  return v;
}

std::vector<double> expand_in_eigenbasis(const std::function<double(double)>& y0, double h0,
                                         double n, double sigma, int K, int quad_points) {
  const Spectrum spec = spectrum(n, sigma, K);
  std::vector<double> a(static_cast<std::size_t>(K), 0.0);
  const int m = quad_points % 2 == 0 ? quad_points : quad_points + 1;
  const double hh = 2.0 / m;
  for (int k = 0; k < K; ++k) {
    const EigenPair& p = spec.pairs[static_cast<std::size_t>(k)];
    double I = 0.0;  // composite Simpson on (-1,1)
    for (int j = 0; j <= m; ++j) {
      const double x = -1.0 + j * hh;
      const double w = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      I += w * y0(x) * p.phi(x);
    }
    I *= hh / 3.0;
    // <(y0,h0), Phi_k>_{H_n} = int y0 phi_k + sigma n^2 h0 * (-phi_k(1)/(sigma n^2))
    a[static_cast<std::size_t>(k)] = I - h0 * p.phi_at_1();
  }
  return a;
}

ZeroModeControl zeroth_mode_control(const std::vector<double>& y0, double h0, double T, double c,
                                    double d, int m, int nt) {
  if (static_cast<int>(y0.size()) != m)
    throw std::invalid_argument("zeroth_mode_control: datum size must equal m");
  if (!(-1.0 < c && c < d && d < 1.0))
    throw std::invalid_argument("zeroth_mode_control: invalid window");
  auto [A, metric] = assemble_mode_operator(0.0, 0.0, m);
  const double delta = 2.0 / (m + 1);
  ZeroModeControl out;
  out.symmetric_window_flag = std::abs(c + d) < 1e-12;
  for (int j = 1; j <= m; ++j) {
    const double x = -1.0 + j * delta;
    if (x >= c - 1e-12 && x <= d + 1e-12) out.window_nodes.push_back(j);
  }
  if (out.window_nodes.empty())
    throw std::invalid_argument("zeroth_mode_control: window contains no grid nodes");
  const int q = static_cast<int>(out.window_nodes.size());
  Eigen::SparseMatrix<double> B(m + 1, q);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int s = 0; s < q; ++s) trip.emplace_back(out.window_nodes[s] - 1, s, 1.0);
    B.setFromTriplets(trip.begin(), trip.end());
  }
  const double dt = T / nt;
  CnKktSolver::Options opt;
  opt.spatial_weight = delta;
  CnKktSolver kkt(A.mat, B, dt, nt, opt);
  Eigen::VectorXd z0(m + 1);
  for (int j = 0; j < m; ++j) z0[j] = y0[static_cast<std::size_t>(j)];
  z0[m] = h0;
  CnKktSolver::Result res = kkt.solve(z0);
  out.kkt_residual = res.kkt_residual;

  CnStepper st(A.mat, dt);
  Eigen::VectorXd z = z0;
  for (int k = 0; k < nt; ++k) z = st.step(z, B * (res.u[k] + res.u[k + 1]));
  out.terminal_y_norm = std::sqrt(delta) * z.head(m).norm();
  out.terminal_h_abs = std::abs(z[m]);
  double obj = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const double th = (k == 0 || k == nt) ? 0.5 : 1.0;
    obj += th * dt * delta * res.u[k].squaredNorm();
  }
  out.control_norm = std::sqrt(obj);
  out.u = ControlField::zero(nt + 1, q);
  for (int k = 0; k <= nt; ++k)
    for (int s = 0; s < q; ++s) out.u.slice(k)[s] = res.u[k][s];
  return out;
}

SeriesResult series_lemma(double c, double d, int N) {
  if (N < 1) throw std::invalid_argument("series_lemma: N must be >= 1");
  if (!(-1.0 < c && c < d && d < 1.0))
    throw std::invalid_argument("series_lemma: need -1 < c < d < 1");
  SeriesResult r;
  r.closed_form = 0.25 * (c * c - d * d);
  double s = 0.0;
  for (int j = 1; j <= N; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    s += sgn * (std::cos(j * kPi * c) - std::cos(j * kPi * d)) / (j * j * kPi * kPi);
  }
  r.partial_sum = s;
  return r;
}

CostEstimate observability_cost(double n, double T, double sigma, double c, double d, int K) {
  if (K < 4) throw std::invalid_argument("observability_cost: K must be >= 4");
  const Spectrum spec = spectrum(n, sigma, K);
  const Eigen::MatrixXd G = gramian_matrix(spec.pairs, T, c, d);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) D(k, k) = std::exp(2.0 * spec.pairs[k].lambda * T);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(D, G);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("observability_cost: Gramian pencil solve failed (condition overflow)");
  CostEstimate ce;
  ce.n = n;
  ce.T = T;
  ce.sigma = sigma;
  ce.c = c;
  ce.d = d;
  ce.basis_size = K;
  ce.K_est = ges.eigenvalues().maxCoeff();
  return ce;
}

CostFit observability_cost_sweep(double n, double sigma, double c, double d, int K,
                                 const std::vector<double>& ts) {
  CostFit fit;
  std::vector<double> logk;
  for (double T : ts) {
    fit.table.push_back(observability_cost(n, T, sigma, c, d, K));
    logk.push_back(std::log(fit.table.back().K_est));
  }
  // one-parameter least squares of log K = log M + M / T
  auto loss = [&](double M) {
    double s = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double r = logk[i] - std::log(M) - M / ts[i];
      s += r * r;
    }
    return s;
  };
  double bestM = 1e-6, bestF = loss(1e-6);
  for (int g = 0; g <= 480; ++g) {
    const double M = std::pow(10.0, -6.0 + 12.0 * g / 480.0);
    const double f = loss(M);
    if (f < bestF) {
      bestF = f;
      bestM = M;
    }
  }
  double lo = bestM / 1.2, hi = bestM * 1.2;  // golden-section refinement
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = loss(x1), f2 = loss(x2);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = loss(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = loss(x2);
    }
  }
  fit.M = 0.5 * (lo + hi);
  const double mean = std::accumulate(logk.begin(), logk.end(), 0.0) / logk.size();
  double ss_tot = 0.0;
  for (double v : logk) ss_tot += (v - mean) * (v - mean);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - loss(fit.M) / ss_tot : 1.0;
  return fit;
}

}  // namespace stefan
