#pragma once

#include <complex>
#include <vector>

#include "stefan/assembly.hpp"
#include "stefan/control.hpp"
#include "stefan/stepper.hpp"
#include "stefan/types.hpp"

namespace stefan {

/// Horizontal Fourier coefficients of a State: for each discrete frequency
/// n = 0..nx the complex vertical profile y_n and the complex height h_n,
/// under the unitary DFT over the nx+1 periodic horizontal nodes.
struct ModeDecomposition {
  int ni = 0;  ///< nx+1 horizontal points = number of modes
  int mv = 0;  ///< vertical interior count
  std::vector<std::vector<std::complex<double>>> y;  ///< [mode][vertical node]
  std::vector<std::complex<double>> h;               ///< [mode]

  /// Aliased absolute frequency of mode index n: min(n, ni-n).
  int alias(int n) const { return n <= ni / 2 ? n : ni - n; }
};

ModeDecomposition dft_modes(const State& s, const GridSpec& grid);
State inverse_modes(const ModeDecomposition& dec, const GridSpec& grid);

/// Weighted discrete H-metric: dx^2 |y|^2 + dx |h|^2 + sigma/dx |Dh|^2.
double weighted_inner(const State& a, const State& b, double sigma, double dx);
double weighted_norm(const State& a, double sigma, double dx);

/// Low-frequency projection: zero all modes with alias > mu. Idempotent and
/// self-adjoint in the weighted metric.
State project_low(const State& s, double mu, const GridSpec& grid);

/// Circulant exactness of the assembled operator: A maps single-mode states
/// to single-mode states and commutes with the projection.
struct ModeInvarianceReport {
  double max_offmode_leak = 0.0;   ///< relative off-mode mass of A * (single mode)
  double commutator_norm = 0.0;    ///< relative |(A Pi - Pi A) z| on random z
  bool pass() const { return max_offmode_leak <= 1e-12 && commutator_norm <= 1e-12; }
};
ModeInvarianceReport mode_invariance_check(const GridSpec& grid, const DomainConfig& dom,
                                           unsigned seed = 12345);

/// Measured uncontrolled decay rate of the 1D mode-n system (continuous
/// multiplier n^2), from the endpoint log-slope of the weighted norm over
/// (0, T_obs). The observation window shrinks automatically if the norm
/// underflows.
enum class DecayDatum { generic, ground_eigen };
double decay_rate_check(double n, double sigma, double T_obs, DecayDatum datum,
                        int m = 400, unsigned seed = 2027);

/// Dyadic Lebeau-Robbiano schedule: T_j = 2^{-j} T, mu_j = 2^j beta on
/// intervals (tau_{j-1}, tau_j), each split half control / half decay.
struct DyadicSchedule {
  double T = 0.0;
  double beta = 1.0;
  int J = 6;
  int nt_total = 0;              ///< global uniform CN steps over (0, T)
  std::vector<double> tau;       ///< interval boundaries tau_0..tau_J
  std::vector<int> step_of_tau;  ///< global step index of each boundary
  std::vector<double> mu;        ///< thresholds mu_1..mu_J

  /// nt_total must be divisible by 2^{J+1} so every half-interval lands on
  /// the global step grid; builds the boundaries.
  static DyadicSchedule build(double T, double beta, int J, int nt_total);
};

struct LrIntervalReport {
  int j = 0;
  double T_j = 0.0;
  double mu_j = 0.0;
  double control_norm = 0.0;       ///< L2 norm of the interval's control
  double end_state_norm = 0.0;     ///< weighted norm at tau_j
  double mid_lowmode_residual = 0.0;  ///< |Pi_mu z| / |z0| right after control
};

struct LrResult {
  DyadicSchedule schedule;
  ControlField u;                  ///< pasted control on the region's node set
  std::vector<int> region_node_set;
  std::vector<LrIntervalReport> intervals;
  std::vector<State> recorded_states;  ///< state at each tau_j and at T
  double initial_norm = 0.0;
  double final_norm = 0.0;         ///< weighted norm at T
  double replay_gap = 0.0;         ///< recorded vs monolithic replay, relative
  double total_control_norm = 0.0;
};

struct LrOptions {
  double beta = 1.0;
  int J = 6;
  int nt_total = 0;  ///< 0: smallest multiple of 2^{J+1} at least 8 * 2^J
  unsigned seed = 0; ///< unused; kept for config plumbing
};

/// Frequency-split null control: on each dyadic interval, drive every mode
/// |n| <= mu_j of the discrete system to zero on the first half (per-mode
/// minimal-norm CN programs, the zeroth mode carrying its scalar h
/// constraint), then let the system dissipate on the second half. The region
/// must be a rectangle spanning the full horizontal period so that mode
/// programs stay exactly decoupled; the pasted control, replayed through the
/// monolithic simulator, reproduces the recorded states to roundoff.
LrResult lr_synthesize(const State& z0, const GridSpec& grid, const DomainConfig& dom,
                       const ControlRegion& region, const LrOptions& opt);

}  // namespace stefan
