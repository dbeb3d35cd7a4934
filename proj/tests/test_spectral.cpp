#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "stefan/assembly.hpp"
#include "stefan/spectral.hpp"

using namespace stefan;

namespace {
constexpr double kPi = oracles::kPi;
}

TEST_CASE("branch roots sit strictly inside their quarter-period intervals") {
  for (double sigma : {0.5, 2.0, 10.0}) {
    for (double n : {1.0, 7.0, 50.0}) {
      for (int k = 1; k <= 8; ++k) {
        const double eps = branch_root(n, sigma, k);
        CHECK(eps > 0.0);
        CHECK(eps < kPi / 4.0);
      }
    }
  }
}

TEST_CASE("branch root matches a high-precision oracle value") {
  // frozen with a 50-digit bisection of the transcendental equation
  const double eps = branch_root(1.0, 5.0, 1);
  const double nu = kPi / 2.0 + kPi / 4.0 - eps;
  CHECK(nu == doctest::Approx(2.11725685343276500807).epsilon(1e-13));
  const double eps2 = branch_root(3.0, 10.0, 2);
  const double nu2 = 2.0 * kPi / 2.0 + kPi / 4.0 - eps2;
  CHECK(nu2 == doctest::Approx(3.892574888323057409).epsilon(1e-13));
  // cross-check against the test-local long double bisection oracle
  const long double nu_oracle = oracles::branch_root_bisect(2.0, 3.0, 4);
  const double eps3 = branch_root(2.0, 3.0, 4);
  CHECK(static_cast<double>(nu_oracle) ==
        doctest::Approx(4.0 * kPi / 2.0 + kPi / 4.0 - eps3).epsilon(1e-10));
}

TEST_CASE("large-n roots approach the pole as sigma grows (epsilon monotone)") {
  const double e5 = branch_root(1e4, 5.0, 1);
  const double e50 = branch_root(1e4, 50.0, 1);
  const double e500 = branch_root(1e4, 500.0, 1);
  CHECK(e5 == doctest::Approx(0.0431253470408).epsilon(1e-9));
  CHECK(e50 == doctest::Approx(0.00425170185914).epsilon(1e-9));
  CHECK(e500 == doctest::Approx(0.000424489578771).epsilon(1e-9));
  CHECK(e5 > e50);
  CHECK(e50 > e500);
}

TEST_CASE("the extra low branch exists exactly for sigma > 2") {
  const double eps = branch_root(1.0, 10.0, 0);
  const double nu = kPi / 4.0 - eps;
  CHECK(nu == doctest::Approx(0.6794514475529561).epsilon(1e-12));
  CHECK_THROWS_AS(branch_root(1.0, 1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(branch_root(1.0, 2.0, 0), std::invalid_argument);
}

TEST_CASE("subcritical root: frozen values, interval bound, continuity towards sigma = 2") {
  const double nu_a = subcritical_root(3.0, 0.5);
  CHECK(nu_a == doctest::Approx(1.495455954796546054).epsilon(1e-12));
  const double nu_b = subcritical_root(1.0, 1.5);
  CHECK(nu_b == doctest::Approx(0.35644522085926013).epsilon(1e-12));
  for (int n = 1; n <= 50; n += 7) {
    const double nu = subcritical_root(n, 0.5);
    CHECK(nu > 0.0);
    CHECK(nu <= 1.0 / 0.5 + 1e-12);
  }
  double prev = 1e9;
  for (double sg : {1.9, 1.99, 1.999}) {
    const double nu = subcritical_root(5.0, sg);
    CHECK(nu < prev);
    prev = nu;
  }
  CHECK(prev < 0.05);  // nu0 -> 0 as sigma -> 2-
  CHECK_THROWS_AS(subcritical_root(2.0, 2.5), std::invalid_argument);
}

TEST_CASE("subcritical characteristic function has the expected sign pattern") {
  const double n = 4.0, sigma = 0.7;
  const double n2 = n * n;
  auto f = [&](double nu) {
    return (-nu * nu - sigma * n2 * nu + n2) + (nu * nu - sigma * n2 * nu - n2) * std::exp(-4.0 * nu);
  };
  const double root = subcritical_root(n, sigma);
  const double hi = 0.5 * (std::sqrt(n2 * n2 * sigma * sigma + 4.0 * n2) - n2 * sigma);
  CHECK(f(0.25 * root) > 0.0);     // positive after the double root at 0
  CHECK(f(0.5 * (root + hi)) < 0.0);  // negative towards the upper endpoint
  CHECK(std::abs(f(root)) <= 1e-9 * n2);
}

TEST_CASE("spectrum: critical case is exact and unique to sigma = 2") {
  for (double n : {1.0, 4.0, 33.0}) {
    const Spectrum sp = spectrum(n, 2.0, 6);
    CHECK(sp.pairs[0].lambda == -n * n);  // exact, no tolerance
    CHECK(sp.pairs[0].kind == EigenCase::critical);
    for (std::size_t k = 1; k < sp.pairs.size(); ++k)
      CHECK(sp.pairs[k].kind == EigenCase::supercritical);
  }
  const Spectrum sub = spectrum(3.0, 1.0, 4);
  CHECK(sub.pairs[0].kind == EigenCase::subcritical);
  const Spectrum sup = spectrum(3.0, 10.0, 4);
  CHECK(sup.pairs[0].kind == EigenCase::supercritical);
  CHECK(sup.pairs[0].branch == 0);
}

TEST_CASE("spectrum: decreasing, separated, gap lemma, residuals") {
  for (double sigma : {0.5, 2.0, 10.0}) {
    for (double n : {1.0, 7.0, 25.0, 50.0}) {
      const Spectrum sp = spectrum(n, sigma, 20);
      const SpectralReport rep = spectral_checks(n, sigma, 20);
      CHECK(rep.residuals_ok);
      CHECK(rep.intervals_ok);
      CHECK(rep.gap_lemma_ok);
      CHECK(rep.separation_ok);
      CHECK(rep.cases_ok);
      for (std::size_t k = 0; k + 1 < sp.pairs.size(); ++k) {
        CHECK(sp.pairs[k].lambda > sp.pairs[k + 1].lambda);
        const double gap = sp.pairs[k].lambda - sp.pairs[k + 1].lambda;
        CHECK(gap >= kPi * kPi / 4.0 - 1e-9);
        if (k >= 1) CHECK(gap >= 3.0 * kPi * kPi / 8.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("spectral checks pass trivially with a single eigenvalue") {
  const SpectralReport rep = spectral_checks(4.0, 1.0, 1);
  CHECK(rep.separation_ok);
  CHECK(rep.pass());
}

TEST_CASE("eigenvalue asymptotics: nu_k^2 / k^2 approaches (pi/2)^2") {
  for (double sigma : {0.5, 10.0}) {
    const Spectrum sp = spectrum(3.0, sigma, 51);
    const double v = (-sp.pairs[50].lambda - 9.0) / (50.0 * 50.0);
    CHECK(v == doctest::Approx(kPi * kPi / 4.0).epsilon(0.05));
  }
}

TEST_CASE("gap lemma numbers from the statement") {
  const Spectrum a = spectrum(7.0, 10.0, 5);
  CHECK(a.pairs[0].lambda <= -49.0);
  const Spectrum b = spectrum(3.0, 0.5, 5);
  CHECK(b.pairs[0].lambda <= -2.25);
}

TEST_CASE("eigenfunctions vanish at the bottom and are unit-normalized") {
  for (double sigma : {0.5, 2.0, 10.0}) {
    const Spectrum sp = spectrum(2.0, sigma, 6);
    for (const EigenPair& p : sp.pairs) {
      CHECK(p.phi(-1.0) == 0.0);
      // independent quadrature of the weighted norm
      const double y_mass =
          oracles::simpson([&](double x) { return p.phi(x) * p.phi(x); }, -1.0, 1.0, 10000);
      const double norm2 = y_mass + p.phi_at_1() * p.phi_at_1() / (sigma * p.n * p.n);
      CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("eigenfunctions are pairwise orthogonal in the weighted metric") {
  for (double sigma : {0.9, 2.0, 6.0}) {
    const Spectrum sp = spectrum(3.0, sigma, 5);
    for (std::size_t a = 0; a < sp.pairs.size(); ++a)
      for (std::size_t b = a + 1; b < sp.pairs.size(); ++b) {
        const EigenPair &pa = sp.pairs[a], &pb = sp.pairs[b];
        const double cross =
            oracles::simpson([&](double x) { return pa.phi(x) * pb.phi(x); }, -1.0, 1.0, 10000) +
            sigma * 9.0 * pa.h_component() * pb.h_component();
        CHECK(std::abs(cross) <= 1e-7);
      }
  }
}

TEST_CASE("window mass closed forms match quadrature and the normalization identity") {
  const double c = -0.5, d = 0.2;
  for (double sigma : {0.5, 2.0, 10.0}) {
    const Spectrum sp = spectrum(4.0, sigma, 6);
    for (const EigenPair& p : sp.pairs) {
      const double wm = window_mass(p, c, d);
      const double quad =
          std::sqrt(oracles::simpson([&](double x) { return p.phi(x) * p.phi(x); }, c, d, 20000));
      CHECK(wm == doctest::Approx(quad).epsilon(1e-8));
      // full window: y-mass plus the weighted h-part is the unit norm
      const double full = window_mass(p, -1.0, 1.0 - 1e-300);
      const double total = full * full + p.phi_at_1() * p.phi_at_1() / (sigma * 16.0);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("window mass sweep stays bounded away from zero") {
  double worst = 1e300;
  for (int n = 1; n <= 50; ++n) {
    const Spectrum sp = spectrum(n, 10.0, 21);
    for (const EigenPair& p : sp.pairs) worst = std::min(worst, window_mass(p, -0.5, 0.2));
  }
  CHECK(worst > 0.01);
}

TEST_CASE("discrete mode operator reproduces the analytic spectrum within 5 percent") {
  for (double n : {1.0, 2.0, 5.0}) {
    for (double sigma : {0.5, 2.0, 10.0}) {
      const Spectrum sp = spectrum(n, sigma, 3);
      auto [A, w] = assemble_mode_operator(n * n, sigma, 400);
      Eigen::EigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A.mat)};
      std::vector<double> evs;
      for (int i = 0; i < es.eigenvalues().size(); ++i) evs.push_back(es.eigenvalues()[i].real());
      std::sort(evs.begin(), evs.end(), std::greater<>());
      for (int k = 0; k < 3; ++k)
        CHECK(evs[static_cast<std::size_t>(k)] ==
              doctest::Approx(sp.pairs[static_cast<std::size_t>(k)].lambda).epsilon(0.05));
    }
  }
}

TEST_CASE("mode operator applied to sampled eigenfunctions reproduces lambda") {
  const double sigma = 3.0;
  for (double n : {1.0, 6.0}) {
    const int m = 400;
    const double d = 2.0 / (m + 1);
    auto [A, w] = assemble_mode_operator(n * n, sigma, m);
    const Spectrum sp = spectrum(n, sigma, 2);
    for (const EigenPair& p : sp.pairs) {
      Eigen::VectorXd v(m + 1);
      for (int j = 1; j <= m; ++j) v[j - 1] = p.phi(-1.0 + j * d);
      v[m] = p.h_component();
      const Eigen::VectorXd Av = A.mat * v;
      Eigen::VectorXd diff = Av - p.lambda * v;
      double num = 0.0, den = 0.0;
      for (int r = 0; r <= m; ++r) {
        num += w.weights[static_cast<std::size_t>(r)] * diff[r] * diff[r];
        den += w.weights[static_cast<std::size_t>(r)] * (p.lambda * v[r]) * (p.lambda * v[r]);
      }
      CHECK(std::sqrt(num / den) <= 30.0 * d);  // first-order trace error
    }
  }
}

TEST_CASE("near-critical sigma raises a warning instead of the critical case") {
  const Spectrum sp = spectrum(3.0, 2.0 + 5e-14, 3);
  CHECK(sp.near_critical_warning);
  CHECK(sp.pairs[0].kind == EigenCase::supercritical);
  const Spectrum sp2 = spectrum(3.0, 2.0, 3);
  CHECK(!sp2.near_critical_warning);
  CHECK(sp2.pairs[0].kind == EigenCase::critical);
}
