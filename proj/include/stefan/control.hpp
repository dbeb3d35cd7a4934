#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stefan/assembly.hpp"
#include "stefan/spectral.hpp"
#include "stefan/stepper.hpp"
#include "stefan/types.hpp"

namespace stefan {

enum class Backend { kkt, gramian_cg };
std::string to_string(Backend b);

struct ControlSolution {
  ControlField u;
  double control_norm = 0.0;  ///< discrete L2((0,T) x omega) norm
  double terminal_y_norm = 0.0;
  double terminal_h_norm = 0.0;
  Backend backend = Backend::kkt;
  int iterations = 0;
  double residual = 0.0;  ///< KKT stationarity residual / final CG residual
  double epsilon = 0.0;   ///< final penalization weight (gramian_cg)
  bool converged = false;
  State terminal;
  std::vector<double> omega_norm_series;  ///< ||u(t_k)||_{L2(omega)} per slice

  struct SweepPoint {
    double epsilon = 0.0;
    double control_norm = 0.0;
    double terminal_relative = 0.0;
  };
  std::vector<SweepPoint> sweep_log;  ///< gramian_cg penalization sweep
};

/// Minimal-norm Crank-Nicolson control problem
///   min sum_k theta_k dt w_sp |u^k|^2   (theta trapezoidal)
///   s.t. (I - dt/2 A) z^{k+1} = (I + dt/2 A) z^k + dt/2 B (u^k + u^{k+1}),
///        z^{nt} = 0,
/// solved through the sparse symmetric indefinite KKT system, factorized by
/// block-tridiagonal elimination in time order. The factorization can be
/// reused across right-hand sides (initial states).
class CnKktSolver {
 public:
  struct Options {
    double spatial_weight = 1.0;   ///< quadrature weight per control node
    bool zero_first_slice = false; ///< pin u^0 = 0
    bool zero_last_slice = false;  ///< pin u^{nt} = 0 (for pasted schedules)
    int refine_steps = 3;
  };

  CnKktSolver(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
              double dt, int nt, Options opt);

  struct Result {
    std::vector<Eigen::VectorXd> u;  ///< nt+1 slices
    double objective = 0.0;          ///< sum theta_k dt w_sp |u^k|^2
    double kkt_residual = 0.0;       ///< relative residual of the KKT system
    double stationarity_residual = 0.0;
  };
  Result solve(const Eigen::VectorXd& z0) const;

  int nt() const { return nt_; }
  double dt() const { return dt_; }

 private:
  struct Stage {
    bool has_u = false, has_z = false, has_p = false;
    int off_u = -1, off_z = -1, off_p = -1;  ///< within the stage
    int dim = 0;
    int offset = 0;  ///< into the global KKT vector
  };

  Eigen::VectorXd apply_kkt(const Eigen::VectorXd& x) const;
  Eigen::VectorXd solve_factored(const Eigen::VectorXd& rhs) const;

  int N_ = 0, q_ = 0, nt_ = 0;
  double dt_ = 0.0;
  Options opt_;
  Eigen::SparseMatrix<double> B_, Mm_, Mp_;
  std::vector<Stage> stages_;
  std::vector<Eigen::SparseMatrix<double>> D_;  ///< diagonal stage blocks
  std::vector<Eigen::SparseMatrix<double>> U_;  ///< super-diagonal stage blocks
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  int total_dim_ = 0;
};

/// Minimal L2((0,T) x omega)-norm null control for the full coupled system.
///  - Backend::kkt: direct solve of the equality-constrained QP.
///  - Backend::gramian_cg: conjugate gradient on the epsilon-regularized HUM
///    operator assembled from simulate/simulate_adjoint; epsilon is swept
///    down until the terminal norm is below `tol` relative.
ControlSolution solve_minimal_norm_control(const SparseOperator& A, const SparseOperator& B,
                                           const State& z0, const GridSpec& grid,
                                           const DomainConfig& dom, Backend backend,
                                           double tol = 1e-6);

/// |norm_kkt - norm_cg| / norm_kkt for the same data.
double backend_agreement(const SparseOperator& A, const SparseOperator& B, const State& z0,
                         const GridSpec& grid, const DomainConfig& dom, double tol = 1e-8);

/// ---- analytic per-frequency machinery (eigenbasis of the mode operator) ----

/// Exact integral int_0^T e^{mu t} dt with the small-|mu T| series branch.
double exp_time_integral(double mu, double T);

struct ModeControl {
  double n = 0.0, sigma = 0.0, T = 0.0, c = 0.0, d = 0.0;
  int K = 0;
  std::vector<double> coeffs;          ///< Gramian solution a_k
  double control_norm = 0.0;           ///< sqrt(a^T G a)
  double max_terminal_coeff = 0.0;     ///< moment-equation residual, max_k
  double gram_condition_estimate = 0.0;
  /// synthesized control u_n(t, x2) = sum_k a_k e^{lambda_k (T-t)} phi_k(x2)
  /// supported on (c,d); callable for sampling/verification
  double evaluate(double t, double x2) const;
  std::vector<EigenPair> basis;
};

/// Minimal-norm null control of the mode-n system in its eigenbasis: builds
/// the K x K observability Gramian with closed-form time integrals, solves
/// the moment system for the initial coefficients `datum`, and reports the
/// terminal coefficient residual. Default K picks the smallest count whose
/// tail satisfies e^{2 lambda T} < 1e-16, capped at 64 (pass K = 0 for that).
ModeControl per_frequency_control(double n, const std::vector<double>& datum_coeffs, double T,
                                  double c, double d, double sigma, int K = 0);

/// Expand a mode datum (y samples callable, h scalar) in the eigenbasis,
/// using composite Simpson quadrature with `quad_points` panels.
std::vector<double> expand_in_eigenbasis(const std::function<double(double)>& y0, double h0,
                                         double n, double sigma, int K, int quad_points = 4096);

struct ZeroModeControl {
  ControlField u;                 ///< on the vertical window nodes
  std::vector<int> window_nodes;  ///< 1-based vertical node indices
  double control_norm = 0.0;
  double terminal_y_norm = 0.0;
  double terminal_h_abs = 0.0;
  bool symmetric_window_flag = false;  ///< c = -d (theory's excluded case)
  double kkt_residual = 0.0;
};

/// Minimal-norm control of the zeroth mode: 1D Dirichlet heat driven to zero
/// with the additional scalar constraint h(T) = 0, h carrying the trapezoidal
/// time integral of the discrete Neumann trace. Solved as one augmented
/// equality-constrained QP on the mode-0 block.
ZeroModeControl zeroth_mode_control(const std::vector<double>& y0, double h0, double T, double c,
                                    double d, int m, int nt);

/// Partial sum S_N of sum_j dphi_j(1) lambda_j^{-1} <1, phi_j>_{L2(c,d)} with
/// phi_j = sin(j pi x2), lambda_j = j^2 pi^2, plus the closed form
/// (c^2 - d^2)/4.
struct SeriesResult {
  double partial_sum = 0.0;
  double closed_form = 0.0;
};
SeriesResult series_lemma(double c, double d, int N);

struct CostEstimate {
  double n = 0.0, T = 0.0, sigma = 0.0, c = 0.0, d = 0.0;
  double K_est = 0.0;  ///< estimated observability constant
  int basis_size = 0;
};

/// Observability cost from the truncated Gramian: the largest Rayleigh
/// quotient of diag(e^{2 lambda_k T}) against G, i.e. the worst ratio of
/// initial adjoint energy to observed energy over the retained modes.
CostEstimate observability_cost(double n, double T, double sigma, double c, double d, int K);

struct CostFit {
  double M = 0.0;        ///< fitted constant in K = M e^{M/T}
  double r_squared = 0.0;  ///< on log scale
  std::vector<CostEstimate> table;
};

/// Sweep T over `ts` (ascending), estimate costs, and fit log K = log M + M/T.
CostFit observability_cost_sweep(double n, double sigma, double c, double d, int K,
                                 const std::vector<double>& ts);

}  // namespace stefan
