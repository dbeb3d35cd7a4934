#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "stefan/assembly.hpp"
#include "stefan/model.hpp"
#include "stefan/types.hpp"

namespace stefan {

/// Crank-Nicolson stepper for zdot = A z + B u:
///   (I - dt/2 A) z^{k+1} = (I + dt/2 A) z^k + dt/2 B (u^k + u^{k+1}).
/// The implicit factor is factorized once per (A, dt) pair; solves are
/// refined until the relative residual is below 1e-12.
class CnStepper {
 public:
  CnStepper(const Eigen::SparseMatrix<double>& A, double dt);

  /// One step, v = u^k + u^{k+1} already injected through B (pass B*(uk+uk1)).
  Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& Bv) const;
  Eigen::VectorXd step_free(const Eigen::VectorXd& z) const;

  /// Solve (I - dt/2 A) x = rhs to relative residual <= 1e-12.
  Eigen::VectorXd solve_implicit(const Eigen::VectorXd& rhs) const;

  const Eigen::SparseMatrix<double>& implicit_matrix() const { return Mm_; }
  const Eigen::SparseMatrix<double>& explicit_matrix() const { return Mp_; }
  double dt() const { return dt_; }

 private:
  double dt_;
  Eigen::SparseMatrix<double> Mm_, Mp_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

struct Trajectory {
  std::vector<State> states;     ///< nt+1 snapshots
  std::vector<double> energies;  ///< discrete_energy per snapshot
  std::vector<double> times;
};

/// Forward trajectory of the full coupled system under nodal controls u
/// (nt+1 slices). Records the discrete energy at every step.
Trajectory simulate(const SparseOperator& A, const SparseOperator& B, const State& z0,
                    const ControlField& u, const GridSpec& grid, const DomainConfig& dom);

/// Adjoint trajectory: the transpose dynamics integrated backward with the
/// same scheme, zeta^k = (I - dt/2 A^T)^{-1} (I + dt/2 A^T) zeta^{k+1}.
/// Returned in forward index order (states[k] is time t_k). Exact discrete
/// duality with `simulate` holds by construction.
Trajectory simulate_adjoint(const SparseOperator& A, const State& zeta_T, const GridSpec& grid,
                            const DomainConfig& dom);

/// Both sides of the discrete duality identity
///   <z(T), zeta_T> - <z(0), zeta(0)> = sum_k dt/2 <B(u^k+u^{k+1}), (zeta^k+zeta^{k+1})/2>
/// in the plain Euclidean pairing.
struct DualityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap() const;
};
DualityCheck duality_check(const SparseOperator& A, const SparseOperator& B, const State& z0,
                           const ControlField& u, const State& zeta_T, const GridSpec& grid,
                           const DomainConfig& dom);

}  // namespace stefan
