#include "stefan/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stefan/csv.hpp"

namespace stefan {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string SparseOperator::to_coordinate_text() const {
  std::ostringstream os;
  for (int k = 0; k < mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat, k); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << format_double(it.value()) << "\n";
  return os.str();
}

double WeightedMetric::dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * a[static_cast<int>(i)] * b[static_cast<int>(i)];
  return s;
}

double WeightedMetric::norm(const Eigen::VectorXd& a) const { return std::sqrt(dot(a, a)); }

SparseOperator assemble_system(const GridSpec& grid, const DomainConfig& dom) {
  grid.validate_against(dom);
  dom.validate();
  const int mv = grid.vertical();
  const int ni = grid.horizontal_points();
  const double dx = grid.dx(dom);
  const double sigma = dom.sigma;
  const int N = grid.state_dim();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * 6);

  auto right = [&](int i) { return i < ni ? i + 1 : 1; };
  auto left = [&](int i) { return i > 1 ? i - 1 : ni; };

  const double inv2 = 1.0 / (dx * dx);
  for (int j = 1; j <= mv; ++j) {
    for (int i = 1; i <= ni; ++i) {
      const int r = grid.y_index(i, j);
      trip.emplace_back(r, grid.y_index(right(i), j), inv2);
      trip.emplace_back(r, grid.y_index(left(i), j), inv2);
      trip.emplace_back(r, r, -4.0 * inv2);
      if (j + 1 <= mv) {
        trip.emplace_back(r, grid.y_index(i, j + 1), inv2);
      } else {
        // y_{i,mv+1} = sigma (h_{i+1} + h_{i-1} - 2 h_i)/dx^2 substituted
        const double c2 = sigma / (dx * dx * dx * dx);
        if (c2 != 0.0) {
          trip.emplace_back(r, grid.h_index(right(i)), c2);
          trip.emplace_back(r, grid.h_index(left(i)), c2);
          trip.emplace_back(r, grid.h_index(i), -2.0 * c2);
        }
      }
      if (j - 1 >= 1) trip.emplace_back(r, grid.y_index(i, j - 1), inv2);
      // j = 1: y_{i,0} = 0, no entry
    }
  }
  // h rows: hdot_i = (y_{i,mv+1} - y_{i,mv-1})/(2 dx), boundary substituted.
  // Substitution gives c4 = sigma/(2 dx^3) on the h second difference.
  const double c4 = sigma / (2.0 * dx * dx * dx);
  for (int i = 1; i <= ni; ++i) {
    const int r = grid.h_index(i);
    if (c4 != 0.0) {
      trip.emplace_back(r, grid.h_index(right(i)), c4);
      trip.emplace_back(r, grid.h_index(left(i)), c4);
      trip.emplace_back(r, grid.h_index(i), -2.0 * c4);
    }
    trip.emplace_back(r, grid.y_index(i, mv - 1), -1.0 / (2.0 * dx));
  }

  SparseOperator A;
  A.mat.resize(N, N);
  A.mat.setFromTriplets(trip.begin(), trip.end());  // duplicates summed
  A.mat.makeCompressed();
  for (int j = 1; j <= mv; ++j) A.y_slices.push_back({(j - 1) * ni, j * ni});
  A.h_block = {grid.y_unknowns(), N};
  return A;
}

std::vector<int> region_nodes(const ControlRegion& region, const GridSpec& grid,
                              const DomainConfig& dom) {
  const double dx = grid.dx(dom);
  std::vector<int> nodes;
  if (region.kind == ControlRegion::Kind::rectangle) {
    if (!(region.a < region.b) || !(region.c < region.d))
      throw std::invalid_argument("region: rectangle bounds must satisfy a<b, c<d");
    if (region.a < 0.0 || region.b > dom.period || region.c < -1.0 || region.d > 1.0)
      throw std::invalid_argument("region: rectangle bounds outside the domain");
    for (int i = 1; i <= grid.horizontal_points(); ++i) {
      const double x1 = grid.x1(i, dom);
      if (x1 < region.a - 1e-12 || x1 > region.b + 1e-12) continue;
      for (int j = 1; j <= grid.vertical(); ++j) {
        const double x2 = grid.x2(j, dom);
        if (x2 < region.c - 1e-12 || x2 > region.d + 1e-12) continue;
        nodes.push_back(grid.y_index(i, j));
      }
    }
  } else {
    // membership by exact point-to-segment distance <= half_width * dx
    const double mid = 0.5 * (region.start_x1 + region.end_x1);
    const double ax = region.start_x1, ay = region.slope * (region.start_x1 - mid);
    const double bx = region.end_x1, by = region.slope * (region.end_x1 - mid);
    const double vx = bx - ax, vy = by - ay;
    const double vv = vx * vx + vy * vy;
    if (!(vv > 0.0)) throw std::invalid_argument("region: degenerate band segment");
    const double lim = region.half_width * dx * (1.0 + 1e-9) + 1e-12;
    for (int i = 1; i <= grid.horizontal_points(); ++i) {
      for (int j = 1; j <= grid.vertical(); ++j) {
        const double x = grid.x1(i, dom), y = grid.x2(j, dom);
        double t = ((x - ax) * vx + (y - ay) * vy) / vv;
        t = std::clamp(t, 0.0, 1.0);
        const double px = ax + t * vx, py = ay + t * vy;
        if (std::hypot(x - px, y - py) <= lim) nodes.push_back(grid.y_index(i, j));
      }
    }
  }
  if (nodes.empty()) throw std::invalid_argument("region: discretizes to an empty node set");
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

SparseOperator assemble_control_injection(const GridSpec& grid, const ControlRegion& region,
                                          const DomainConfig& dom) {
  const std::vector<int> nodes = region_nodes(region, grid, dom);
  SparseOperator B;
  B.mat.resize(grid.state_dim(), static_cast<int>(nodes.size()));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nodes.size());
  for (std::size_t s = 0; s < nodes.size(); ++s)
    trip.emplace_back(nodes[s], static_cast<int>(s), 1.0);
  B.mat.setFromTriplets(trip.begin(), trip.end());
  B.mat.makeCompressed();
  return B;
}

std::pair<SparseOperator, WeightedMetric> assemble_mode_operator(double n_sq, double sigma, int m) {
  if (m < 3) throw std::invalid_argument("mode operator: m must be >= 3");
  if (!(n_sq >= 0.0)) throw std::invalid_argument("mode operator: n_sq must be >= 0");
  const double d = 2.0 / (m + 1);
  const int N = m + 1;
  std::vector<Eigen::Triplet<double>> trip;
  const double inv2 = 1.0 / (d * d);
  for (int j = 1; j <= m; ++j) {
    const int r = j - 1;
    trip.emplace_back(r, r, -2.0 * inv2 - n_sq);
    if (j - 1 >= 1) trip.emplace_back(r, j - 2, inv2);
    if (j + 1 <= m)
      trip.emplace_back(r, j, inv2);
    else if (sigma * n_sq != 0.0)
      trip.emplace_back(r, m, -sigma * n_sq * inv2);  // y_{m+1} = -sigma n^2 h
  }
  // h row: hdot = (y_{m+1} - y_{m-1})/(2d) with the boundary substituted.
  // For n = 0 the boundary value vanishes and the row decouples from h.
  trip.emplace_back(m, m - 2, -1.0 / (2.0 * d));
  if (sigma * n_sq != 0.0) trip.emplace_back(m, m, -sigma * n_sq / (2.0 * d));

  SparseOperator A;
  A.mat.resize(N, N);
  A.mat.setFromTriplets(trip.begin(), trip.end());
  A.mat.makeCompressed();
  A.y_slices.push_back({0, m});
  A.h_block = {m, N};

  WeightedMetric w;
  w.weights.assign(static_cast<std::size_t>(N), d);
  w.weights[static_cast<std::size_t>(m)] = (sigma * n_sq > 0.0) ? sigma * n_sq : 1.0;
  return {std::move(A), std::move(w)};
}

double mode_symbol(int n, const GridSpec& grid, const DomainConfig& dom) {
  const int ni = grid.horizontal_points();
  const double dx = grid.dx(dom);
  const double th = 2.0 * kPi * n / ni;
  return (2.0 - 2.0 * std::cos(th)) / (dx * dx);
}

double continuous_symbol(int n, const DomainConfig& dom) {
  const double w = 2.0 * kPi * n / dom.period;
  return w * w;
}

}  // namespace stefan
