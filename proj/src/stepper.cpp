#include "stefan/stepper.hpp"

#include <cmath>
#include <stdexcept>

namespace stefan {

CnStepper::CnStepper(const Eigen::SparseMatrix<double>& A, double dt) : dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("CnStepper: dt must be > 0");
  const int N = static_cast<int>(A.rows());
  Eigen::SparseMatrix<double> I(N, N);
  I.setIdentity();
  Mm_ = I - (dt / 2.0) * A;
  Mp_ = I + (dt / 2.0) * A;
  Mm_.makeCompressed();
  Mp_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->compute(Mm_);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("CnStepper: factorization of (I - dt/2 A) failed");
}

Eigen::VectorXd CnStepper::solve_implicit(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_->solve(rhs);
  const double scale = rhs.norm();
  if (scale == 0.0) return x;
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd r = rhs - Mm_ * x;
    if (r.norm() <= 1e-12 * scale) break;
    x += lu_->solve(r);
  }
  return x;
}

Eigen::VectorXd CnStepper::step(const Eigen::VectorXd& z, const Eigen::VectorXd& Bv) const {
  return solve_implicit(Mp_ * z + (dt_ / 2.0) * Bv);
}

Eigen::VectorXd CnStepper::step_free(const Eigen::VectorXd& z) const {
  return solve_implicit(Mp_ * z);
}

namespace {
Eigen::VectorXd to_vec(const State& s) {
  const std::vector<double> f = s.flatten();
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<int>(f.size()));
}
State to_state(const Eigen::VectorXd& v, const GridSpec& g) {
  std::vector<double> z(v.data(), v.data() + v.size());
  return State::unflatten(z, g);
}
}  // namespace

Trajectory simulate(const SparseOperator& A, const SparseOperator& B, const State& z0,
                    const ControlField& u, const GridSpec& grid, const DomainConfig& dom) {
  if (!z0.matches(grid)) throw std::invalid_argument("simulate: state/grid mismatch");
  if (u.slices != grid.nt + 1 || u.support_size != static_cast<int>(B.mat.cols()))
    throw std::invalid_argument("simulate: control/grid mismatch");
  const double dt = grid.dt(dom);
  const double dx = grid.dx(dom);
  CnStepper stepper(A.mat, dt);
  Trajectory traj;
  traj.states.reserve(grid.nt + 1);
  Eigen::VectorXd z = to_vec(z0);
  traj.states.push_back(z0);
  traj.energies.push_back(discrete_energy(z0, dom.sigma, dx));
  traj.times.push_back(0.0);
  const int q = u.support_size;
  for (int k = 0; k < grid.nt; ++k) {
    Eigen::VectorXd v(q);
    for (int s = 0; s < q; ++s) v[s] = u.slice(k)[s] + u.slice(k + 1)[s];
    z = stepper.step(z, B.mat * v);
    State sk = to_state(z, grid);
    traj.energies.push_back(discrete_energy(sk, dom.sigma, dx));
    traj.times.push_back((k + 1) * dt);
    traj.states.push_back(std::move(sk));
  }
  return traj;
}

Trajectory simulate_adjoint(const SparseOperator& A, const State& zeta_T, const GridSpec& grid,
                            const DomainConfig& dom) {
  if (!zeta_T.matches(grid)) throw std::invalid_argument("simulate_adjoint: state/grid mismatch");
  const double dt = grid.dt(dom);
  const double dx = grid.dx(dom);
  Eigen::SparseMatrix<double> At = A.mat.transpose();
  CnStepper stepper(At, dt);
  std::vector<Eigen::VectorXd> back(grid.nt + 1);
  back[grid.nt] = to_vec(zeta_T);
  for (int k = grid.nt; k > 0; --k) back[k - 1] = stepper.step_free(back[k]);
  Trajectory traj;
  traj.states.reserve(grid.nt + 1);
  for (int k = 0; k <= grid.nt; ++k) {
    State sk = to_state(back[k], grid);
    traj.energies.push_back(discrete_energy(sk, dom.sigma, dx));
    traj.times.push_back(k * dt);
    traj.states.push_back(std::move(sk));
  }
  return traj;
}

double DualityCheck::relative_gap() const {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - rhs) / scale;
}

DualityCheck duality_check(const SparseOperator& A, const SparseOperator& B, const State& z0,
                           const ControlField& u, const State& zeta_T, const GridSpec& grid,
                           const DomainConfig& dom) {
  const Trajectory zf = simulate(A, B, z0, u, grid, dom);
  const Trajectory zb = simulate_adjoint(A, zeta_T, grid, dom);
  const double dt = grid.dt(dom);
  auto dot = [](const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.y.size(); ++i) s += a.y[i] * b.y[i];
    for (std::size_t i = 0; i < a.h.size(); ++i) s += a.h[i] * b.h[i];
    return s;
  };
  DualityCheck out;
  out.lhs = dot(zf.states.back(), zeta_T) - dot(z0, zb.states.front());
  const int q = u.support_size;
  for (int k = 0; k < grid.nt; ++k) {
    Eigen::VectorXd v(q);
    for (int s = 0; s < q; ++s) v[s] = u.slice(k)[s] + u.slice(k + 1)[s];
    const Eigen::VectorXd Bv = B.mat * v;
    const std::vector<double> za = zb.states[k].flatten();
    const std::vector<double> zbf = zb.states[k + 1].flatten();
    double term = 0.0;
    for (int r = 0; r < Bv.size(); ++r) term += Bv[r] * 0.5 * (za[r] + zbf[r]);
    out.rhs += (dt / 2.0) * term;
  }
  return out;
}

}  // namespace stefan
