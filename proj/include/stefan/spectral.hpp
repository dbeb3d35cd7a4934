#pragma once

#include <string>
#include <vector>

namespace stefan {

/// Which of the three eigenvalue regimes a pair belongs to.
///  - supercritical: lambda < -n^2, eigenfunction sin(nu (1+x2))
///  - critical: lambda = -n^2 (sigma = 2 only), eigenfunction 1+x2
///  - subcritical: lambda in (-n^2, 0) (sigma < 2 only),
///    eigenfunction 2 e^{-nu} sinh(nu (1+x2))
enum class EigenCase { supercritical, critical, subcritical };

/// One eigenvalue of the mode-n operator with its closed-form eigenfunction
/// parameters. `epsilon` is the primary stored root offset for supercritical
/// pairs (nu = branch*pi/2 + pi/4 - epsilon); keeping epsilon rather than nu
/// preserves full precision in the transcendental residual for large nu.
struct EigenPair {
  double n = 1.0;      ///< horizontal frequency parameter (n != 0)
  int k = 0;           ///< unified index, 0-based, decreasing lambda
  int branch = 0;      ///< supercritical branch index (nu in (b pi/2, b pi/2 + pi/4))
  EigenCase kind = EigenCase::supercritical;
  double lambda = 0.0;   ///< eigenvalue, < 0
  double nu = 0.0;       ///< auxiliary root (sqrt(-lambda-n^2) or sqrt(n^2+lambda))
  double epsilon = 0.0;  ///< branch*pi/2 + pi/4 - nu for supercritical pairs
  double c_norm = 0.0;   ///< normalization constant C_{n,k} > 0
  double sigma = 0.0;

  /// Eigenfunction value phi(x2) (normalized in the weighted metric).
  double phi(double x2) const;
  /// Boundary value phi(1).
  double phi_at_1() const;
  /// h-component of the normalized eigen-pair: -phi(1)/(sigma n^2).
  double h_component() const;
  /// Residual of the defining transcendental equation, evaluated in the
  /// numerically stable form (cot identity for supercritical roots).
  double residual() const;
};

struct Spectrum {
  double n = 1.0;
  double sigma = 0.0;
  std::vector<EigenPair> pairs;  ///< strictly decreasing lambda
  bool near_critical_warning = false;  ///< |sigma-2| < 1e-13 but not exactly 2
};

/// Positive root of (nu^2/n^2 + 1) tan(2 nu) = sigma nu in the branch
/// interval (k pi/2, k pi/2 + pi/4), solved for epsilon = k pi/2 + pi/4 - nu
/// by bisection plus safeguarded Newton. k >= 1 exists for every sigma > 0;
/// k = 0 exists iff sigma > 2 (the slope of tan(2 nu) at 0 is 2).
/// Returns epsilon in (0, pi/4).
double branch_root(double n, double sigma, int k);

/// Unique root nu0 in (0, (sqrt(n^4 s^2 + 4n^2) - n^2 s)/2) of
/// f(nu) = (-nu^2 - s n^2 nu + n^2) + (nu^2 - s n^2 nu - n^2) e^{-4 nu},
/// for sigma in (0,2). Satisfies nu0 <= 1/sigma.
double subcritical_root(double n, double sigma);

/// First K eigenvalues of the mode-n operator, decreasing, with closed-form
/// normalization constants.
///
/// For sigma > 2 this includes the supercritical branch-0 root in (0, pi/4)
/// as the leading eigenvalue; the remaining entries use branch index k.
Spectrum spectrum(double n, double sigma, int K);

/// ||phi_{n,k}||_{L^2(c,d)} from the closed-form antiderivatives.
double window_mass(const EigenPair& p, double c, double d);

/// Closed-form <phi_k, phi_l>_{L^2(c,d)} for any case combination.
double window_product(const EigenPair& a, const EigenPair& b, double c, double d);

/// Pass/fail certification of the spectral properties for one (n, sigma):
/// residual sizes, interval membership of the roots, the gap bound
/// lambda <= -min{sigma/2,1} n^2, separation of consecutive eigenvalues,
/// and case exclusivity.
struct SpectralReport {
  double n = 1.0;
  double sigma = 0.0;
  int K = 0;
  double max_residual = 0.0;
  double max_lambda = 0.0;
  double gap_bound = 0.0;       ///< -min{sigma/2,1} n^2
  double min_gap = 0.0;         ///< min consecutive |lambda_{k+1}-lambda_k|
  double min_gap_tail = 0.0;    ///< same over k >= 1
  bool residuals_ok = false;
  bool intervals_ok = false;
  bool gap_lemma_ok = false;
  bool separation_ok = false;
  bool cases_ok = false;
  bool pass() const {
    return residuals_ok && intervals_ok && gap_lemma_ok && separation_ok && cases_ok;
  }
};
SpectralReport spectral_checks(double n, double sigma, int K);

std::string to_string(EigenCase c);

}  // namespace stefan
