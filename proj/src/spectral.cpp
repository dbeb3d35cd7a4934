#include "stefan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stefan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarterPi = kPi / 4.0;

// Supercritical characteristic function in epsilon coordinates:
//   nu = k pi/2 + pi/4 - eps, tan(2 nu) = cot(2 eps) exactly, so
//   psi(eps) = (nu^2/n^2 + 1) cot(2 eps) - sigma nu.
// Strictly decreasing through its root; +inf at eps -> 0+.
double psi(double eps, double n, double sigma, int k) {
  const double nu = k * (kPi / 2.0) + kQuarterPi - eps;
  return (nu * nu / (n * n) + 1.0) / std::tan(2.0 * eps) - sigma * nu;
}

double dpsi(double eps, double n, double sigma, int k) {
  const double nu = k * (kPi / 2.0) + kQuarterPi - eps;
  const double s = std::sin(2.0 * eps);
  const double cot = 1.0 / std::tan(2.0 * eps);
  // d nu/d eps = -1
  return -2.0 * nu / (n * n) * cot - (nu * nu / (n * n) + 1.0) * 2.0 / (s * s) + sigma;
}

}  // namespace

double branch_root(double n, double sigma, int k) {
  if (n == 0.0) throw std::invalid_argument("branch_root: n must be nonzero");
  if (!(sigma > 0.0)) throw std::invalid_argument("branch_root: sigma must be > 0");
  if (k < 0) throw std::invalid_argument("branch_root: k must be >= 0");
  if (k == 0 && !(sigma > 2.0))
    throw std::invalid_argument("branch_root: branch 0 exists only for sigma > 2");
  n = std::abs(n);

  // Bracket away from the endpoints, expanding geometrically toward them if
  // the sign change is missed (the root can sit arbitrarily close to the
  // tan pole for large sigma).
  double delta = 1e-8 * kQuarterPi;
  double a = delta, b = kQuarterPi - delta;
  double fa = psi(a, n, sigma, k), fb = psi(b, n, sigma, k);
  int tries = 0;
  while (fa * fb > 0.0 && tries < 80) {
    delta *= 0.5;
    a = delta;
    b = kQuarterPi - delta;
    fa = psi(a, n, sigma, k);
    fb = psi(b, n, sigma, k);
    ++tries;
  }
  if (fa * fb > 0.0)
    throw std::runtime_error("branch_root: no sign change detected (n=" + std::to_string(n) +
                             " sigma=" + std::to_string(sigma) + " k=" + std::to_string(k) +
                             " psi(a)=" + std::to_string(fa) + " psi(b)=" + std::to_string(fb) + ")");

  // Bisection to a coarse bracket, then safeguarded Newton.
  for (int it = 0; it < 40; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = psi(m, n, sigma, k);
    if (fa * fm <= 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 60; ++it) {
    const double f = psi(x, n, sigma, k);
    if (f == 0.0) break;
    if (f * fa <= 0.0) b = x;
    else a = x;
    const double d = dpsi(x, n, sigma, k);
    double xn = x - f / d;
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);  // fall back to bisection
    if (xn == x) break;
    x = xn;
  }
  return x;
}

double subcritical_root(double n, double sigma) {
  if (n == 0.0) throw std::invalid_argument("subcritical_root: n must be nonzero");
  if (!(sigma > 0.0 && sigma < 2.0))
    throw std::invalid_argument("subcritical_root: requires 0 < sigma < 2");
  n = std::abs(n);
  const double n2 = n * n;
  auto f = [&](double nu) {
    return (-nu * nu - sigma * n2 * nu + n2) + (nu * nu - sigma * n2 * nu - n2) * std::exp(-4.0 * nu);
  };
  // f(0) = 0 with f increasing just to the right; the unique interior root
  // sits below (sqrt(n^4 s^2 + 4 n^2) - n^2 s)/2 <= 1/sigma.
  const double hi_exact = 0.5 * (std::sqrt(n2 * n2 * sigma * sigma + 4.0 * n2) - n2 * sigma);
  double b = hi_exact * (1.0 - 1e-12);
  double a = std::min(1e-6, 0.5 * b);
  double fa = f(a), fb = f(b);
  int tries = 0;
  while (fa <= 0.0 && tries < 120) {  // move closer to 0 until f > 0
    a *= 0.5;
    fa = f(a);
    ++tries;
  }
  if (fa <= 0.0 || fb >= 0.0)
    throw std::runtime_error("subcritical_root: bracket failed (sigma >= 2 passed in error?)");
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
    if (b - a <= 1e-16 * b) break;
  }
  return 0.5 * (a + b);
}

namespace {

EigenPair make_supercritical(double n, double sigma, int unified_k, int branch) {
  EigenPair p;
  p.n = n;
  p.sigma = sigma;
  p.k = unified_k;
  p.branch = branch;
  p.kind = EigenCase::supercritical;
  p.epsilon = branch_root(n, sigma, branch);
  p.nu = branch * (kPi / 2.0) + kQuarterPi - p.epsilon;
  p.lambda = -p.nu * p.nu - n * n;
  const double s4 = std::sin(4.0 * p.nu) / (4.0 * p.nu);
  const double s2 = std::sin(2.0 * p.nu);
  p.c_norm = 1.0 / std::sqrt((1.0 - s4) + s2 * s2 / (n * n * sigma));
  return p;
}

EigenPair make_critical(double n, double sigma) {
  EigenPair p;
  p.n = n;
  p.sigma = sigma;
  p.k = 0;
  p.branch = 0;
  p.kind = EigenCase::critical;
  p.nu = 0.0;
  p.epsilon = 0.0;
  p.lambda = -n * n;
  // phi = C (1+x2): integral of (1+x2)^2 over (-1,1) is 8/3, phi(1) = 2C.
  p.c_norm = 1.0 / std::sqrt(8.0 / 3.0 + 4.0 / (sigma * n * n));
  return p;
}

EigenPair make_subcritical(double n, double sigma) {
  EigenPair p;
  p.n = n;
  p.sigma = sigma;
  p.k = 0;
  p.branch = 0;
  p.kind = EigenCase::subcritical;
  p.nu = subcritical_root(n, sigma);
  p.epsilon = 0.0;
  p.lambda = p.nu * p.nu - n * n;
  // phi = C 2 e^{-nu} sinh(nu(1+x2)); the y-part integrates to
  // e^{-2nu} (sinh(4nu) - 4nu)/nu and phi(1) = 2 e^{-nu} sinh(2nu).
  const double nu = p.nu;
  const double ypart = std::exp(-2.0 * nu) * (std::sinh(4.0 * nu) - 4.0 * nu) / nu;
  const double bdry = 2.0 * std::exp(-nu) * std::sinh(2.0 * nu);
  p.c_norm = 1.0 / std::sqrt(ypart + bdry * bdry / (sigma * n * n));
  return p;
}

}  // namespace

Spectrum spectrum(double n, double sigma, int K) {
  if (K < 1) throw std::invalid_argument("spectrum: K must be >= 1");
  if (n == 0.0) throw std::invalid_argument("spectrum: n must be nonzero");
  if (!(sigma > 0.0)) throw std::invalid_argument("spectrum: sigma must be > 0");
  n = std::abs(n);
  Spectrum spec;
  spec.n = n;
  spec.sigma = sigma;
  spec.near_critical_warning = (sigma != 2.0) && (std::abs(sigma - 2.0) < 1e-13);
  if (sigma > 2.0) {
    // Branch 0 carries the leading eigenvalue: tan(2 nu) grows from 0 with
    // slope 2 < sigma, so the characteristic line is crossed once in
    // (0, pi/4) before the usual branches.
    for (int k = 0; k < K; ++k) spec.pairs.push_back(make_supercritical(n, sigma, k, k));
  } else if (sigma == 2.0) {
    spec.pairs.push_back(make_critical(n, sigma));
    for (int k = 1; k < K; ++k) spec.pairs.push_back(make_supercritical(n, sigma, k, k));
  } else {
    spec.pairs.push_back(make_subcritical(n, sigma));
    for (int k = 1; k < K; ++k) spec.pairs.push_back(make_supercritical(n, sigma, k, k));
  }
  return spec;
}

double EigenPair::phi(double x2) const {
  switch (kind) {
    case EigenCase::supercritical:
      return c_norm * std::sin(nu * (1.0 + x2));
    case EigenCase::critical:
      return c_norm * (1.0 + x2);
    case EigenCase::subcritical:
      return c_norm * 2.0 * std::exp(-nu) * std::sinh(nu * (1.0 + x2));
  }
  return 0.0;
}

double EigenPair::phi_at_1() const {
  switch (kind) {
    case EigenCase::supercritical:
      return c_norm * std::sin(2.0 * nu);
    case EigenCase::critical:
      return 2.0 * c_norm;
    case EigenCase::subcritical:
      return c_norm * 2.0 * std::exp(-nu) * std::sinh(2.0 * nu);
  }
  return 0.0;
}

double EigenPair::h_component() const { return -phi_at_1() / (sigma * n * n); }

double EigenPair::residual() const {
  switch (kind) {
    case EigenCase::supercritical:
      return psi(epsilon, n, sigma, branch);
    case EigenCase::critical:
      return 0.0;
    case EigenCase::subcritical: {
      const double n2 = n * n;
      const double f = (-nu * nu - sigma * n2 * nu + n2) +
                       (nu * nu - sigma * n2 * nu - n2) * std::exp(-4.0 * nu);
      return f / (n2 + sigma * n2 * nu + nu * nu);  // natural scale of the terms
    }
  }
  return 0.0;
}

namespace {

// closed-form primitive of products of the raw eigenfunction shapes
// (sin(a w), sinh(a w), w with w = 1 + x2) over w in (w1, w2)
enum class Shape { trig, hyper, affine };

struct RawShape {
  Shape s;
  double a = 0.0;      // frequency (unused for affine)
  double scale = 1.0;  // prefactor applied to the shape
};

RawShape raw_shape(const EigenPair& p) {
  switch (p.kind) {
    case EigenCase::supercritical:
      return {Shape::trig, p.nu, p.c_norm};
    case EigenCase::critical:
      return {Shape::affine, 0.0, p.c_norm};
    case EigenCase::subcritical:
      return {Shape::hyper, p.nu, p.c_norm * 2.0 * std::exp(-p.nu)};
  }
  return {Shape::affine, 0.0, 0.0};
}

double primitive_trig_trig(double a, double b, double w) {
  // int sin(aw) sin(bw) dw
  if (std::abs(a - b) < 1e-9 * std::max(a, b)) {
    // int sin^2(aw) dw at matched frequency
    return 0.5 * w - std::sin(2.0 * a * w) / (4.0 * a);
  }
  return 0.5 * (std::sin((a - b) * w) / (a - b) - std::sin((a + b) * w) / (a + b));
}

double primitive_hyper_hyper(double a, double b, double w) {
  // int sinh(aw) sinh(bw) dw
  if (std::abs(a - b) < 1e-9 * std::max(a, b)) {
    return std::sinh(2.0 * a * w) / (4.0 * a) - 0.5 * w;
  }
  return 0.5 * (std::sinh((a + b) * w) / (a + b) - std::sinh((a - b) * w) / (a - b));
}

double primitive_trig_hyper(double a, double b, double w) {
  // int sin(aw) sinh(bw) dw
  const double d = a * a + b * b;
  return (b * std::sin(a * w) * std::cosh(b * w) - a * std::cos(a * w) * std::sinh(b * w)) / d;
}

double primitive_affine_trig(double a, double w) {
  // int w sin(aw) dw
  return std::sin(a * w) / (a * a) - w * std::cos(a * w) / a;
}

double primitive_affine_hyper(double a, double w) {
  // int w sinh(aw) dw
  return w * std::cosh(a * w) / a - std::sinh(a * w) / (a * a);
}

double primitive(const RawShape& p, const RawShape& q, double w) {
  if (p.s == Shape::trig && q.s == Shape::trig) return primitive_trig_trig(p.a, q.a, w);
  if (p.s == Shape::hyper && q.s == Shape::hyper) return primitive_hyper_hyper(p.a, q.a, w);
  if (p.s == Shape::trig && q.s == Shape::hyper) return primitive_trig_hyper(p.a, q.a, w);
  if (p.s == Shape::hyper && q.s == Shape::trig) return primitive_trig_hyper(q.a, p.a, w);
  if (p.s == Shape::affine && q.s == Shape::affine) return w * w * w / 3.0;
  if (p.s == Shape::affine && q.s == Shape::trig) return primitive_affine_trig(q.a, w);
  if (p.s == Shape::trig && q.s == Shape::affine) return primitive_affine_trig(p.a, w);
  if (p.s == Shape::affine && q.s == Shape::hyper) return primitive_affine_hyper(q.a, w);
  return primitive_affine_hyper(p.a, w);
}

}  // namespace

double window_product(const EigenPair& a, const EigenPair& b, double c, double d) {
  if (!(-1.0 < c && c < d && d < 1.0 + 1e-15))
    throw std::invalid_argument("window_product: need -1 < c < d <= 1");
  const RawShape pa = raw_shape(a), pb = raw_shape(b);
  const double w1 = 1.0 + c, w2 = 1.0 + d;
  return pa.scale * pb.scale * (primitive(pa, pb, w2) - primitive(pa, pb, w1));
}

double window_mass(const EigenPair& p, double c, double d) {
  const double q = window_product(p, p, c, d);
  return std::sqrt(std::max(q, 0.0));
}

SpectralReport spectral_checks(double n, double sigma, int K) {
  const Spectrum spec = spectrum(n, sigma, K);
  SpectralReport rep;
  rep.n = std::abs(n);
  rep.sigma = sigma;
  rep.K = K;
  rep.gap_bound = -std::min(sigma / 2.0, 1.0) * rep.n * rep.n;
  rep.max_residual = 0.0;
  rep.max_lambda = spec.pairs.front().lambda;
  rep.intervals_ok = true;
  rep.cases_ok = true;
  for (const EigenPair& p : spec.pairs) {
    rep.max_residual = std::max(rep.max_residual, std::abs(p.residual()));
    rep.max_lambda = std::max(rep.max_lambda, p.lambda);
    if (p.kind == EigenCase::supercritical) {
      if (!(p.epsilon > 0.0 && p.epsilon < kQuarterPi)) rep.intervals_ok = false;
      if (!(p.lambda < -rep.n * rep.n)) rep.cases_ok = false;
    } else if (p.kind == EigenCase::critical) {
      if (sigma != 2.0) rep.cases_ok = false;
    } else {
      if (!(sigma < 2.0)) rep.cases_ok = false;
      if (!(p.nu > 0.0 && p.nu <= 1.0 / sigma)) rep.intervals_ok = false;
    }
  }
  rep.residuals_ok = rep.max_residual <= 1e-11;
  rep.gap_lemma_ok = rep.max_lambda <= rep.gap_bound + 1e-12 * std::abs(rep.gap_bound);
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.min_gap_tail = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < spec.pairs.size(); ++k) {
    const double gap = spec.pairs[k].lambda - spec.pairs[k + 1].lambda;
    rep.min_gap = std::min(rep.min_gap, gap);
    if (k >= 1) rep.min_gap_tail = std::min(rep.min_gap_tail, gap);
  }
  const double kGapFirst = kPi * kPi / 4.0;
  const double kGapTail = 3.0 * kPi * kPi / 8.0;
  rep.separation_ok = (spec.pairs.size() < 2 || rep.min_gap >= kGapFirst - 1e-9) &&
                      (spec.pairs.size() < 3 || rep.min_gap_tail >= kGapTail - 1e-9);
  return rep;
}

std::string to_string(EigenCase c) {
  switch (c) {
    case EigenCase::supercritical:
      return "supercritical";
    case EigenCase::critical:
      return "critical";
    case EigenCase::subcritical:
      return "subcritical";
  }
  return "?";
}

}  // namespace stefan
