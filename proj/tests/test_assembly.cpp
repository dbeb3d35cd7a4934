#include <doctest.h>

#include <Eigen/Dense>
#include <set>

#include "oracles.hpp"
#include "stefan/assembly.hpp"
#include "stefan/model.hpp"

using namespace stefan;

namespace {
GridSpec grid_of(int nx, int nt = 10) {
  GridSpec g;
  g.nx = nx;
  g.nt = nt;
  return g;
}
DomainConfig domain_of(double sigma) {
  DomainConfig d;
  d.sigma = sigma;
  return d;
}
}  // namespace

TEST_CASE("full system matches the naive equation-by-equation assembler") {
  for (double sigma : {0.0, 1.0, 10.0}) {
    const GridSpec g = grid_of(3);
    const DomainConfig dom = domain_of(sigma);
    CHECK(g.dx(dom) == doctest::Approx(0.5));
    const SparseOperator A = assemble_system(g, dom);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
    const Eigen::MatrixXd ref = oracles::naive_system(3, sigma);
    CHECK((dense - ref).cwiseAbs().maxCoeff() <= 1e-14 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("interior rows carry the plain 5-point stencil") {
  const GridSpec g = grid_of(8);
  const DomainConfig dom = domain_of(7.0);
  const double dx = g.dx(dom);
  const SparseOperator A = assemble_system(g, dom);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
  // a row with all four neighbors interior
  const int r = g.y_index(4, 4);
  std::multiset<double> vals;
  int nnz = 0;
  for (int c = 0; c < dense.cols(); ++c)
    if (dense(r, c) != 0.0) {
      vals.insert(dense(r, c) * dx * dx);
      ++nnz;
    }
  CHECK(nnz == 5);
  CHECK(vals.count(-4.0) == 1);
  CHECK(vals.count(1.0) == 4);
  // row sum zero for interior rows
  CHECK(std::abs(dense.row(r).sum()) <= 1e-12 / (dx * dx));
}

TEST_CASE("sigma = 0 decouples the h blocks") {
  const GridSpec g = grid_of(6);
  const SparseOperator A = assemble_system(g, domain_of(0.0));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
  const int Ny = g.y_unknowns();
  // A2 block (top slice rows, h columns) and A4 block (h rows, h columns)
  CHECK(dense.block(Ny - g.horizontal_points(), Ny, g.horizontal_points(), g.horizontal_points())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(dense.block(Ny, Ny, g.horizontal_points(), g.horizontal_points()).cwiseAbs().maxCoeff() ==
        0.0);
  // h rows still see y through the Neumann difference (A3)
  CHECK(dense.block(Ny, 0, g.horizontal_points(), Ny).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("y-to-y blocks are circulant in the horizontal index") {
  const GridSpec g = grid_of(7);
  const SparseOperator A = assemble_system(g, domain_of(3.0));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
  const int ni = g.horizontal_points();
  for (int j = 1; j <= g.vertical(); ++j) {
    const Eigen::MatrixXd blk = dense.block((j - 1) * ni, (j - 1) * ni, ni, ni);
    for (int r = 1; r < ni; ++r)
      for (int c = 0; c < ni; ++c)
        CHECK(blk(r, c) == doctest::Approx(blk(0, ((c - r) % ni + ni) % ni)).epsilon(1e-15));
  }
}

TEST_CASE("invalid grids are rejected") {
  GridSpec g = grid_of(1);
  CHECK_THROWS_AS(assemble_system(g, domain_of(1.0)), std::invalid_argument);
  GridSpec g2 = grid_of(8);
  DomainConfig dom;
  dom.period = 1.7;  // 2/dx is not an integer
  CHECK_THROWS_AS(assemble_system(g2, dom), std::invalid_argument);
}

TEST_CASE("control injection: full rectangle selects the whole y block") {
  const GridSpec g = grid_of(6);
  const DomainConfig dom = domain_of(2.0);
  const ControlRegion all = ControlRegion::make_rectangle(0.0, 2.0, -1.0, 1.0);
  const SparseOperator B = assemble_control_injection(g, all, dom);
  CHECK(B.mat.cols() == g.y_unknowns());
  const Eigen::MatrixXd dense = Eigen::MatrixXd(B.mat);
  CHECK(dense.topRows(g.y_unknowns()).isIdentity(0.0));
  CHECK(dense.bottomRows(g.horizontal_points()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tilted band with zero half-width picks the diagonal nodes") {
  const GridSpec g = grid_of(12);
  const DomainConfig dom = domain_of(10.0);
  const double dx = g.dx(dom);
  const ControlRegion band = ControlRegion::make_tilted_band(0.5, 1.5, 1.0, 0.0);
  const std::vector<int> nodes = region_nodes(band, g, dom);
  // geometric membership oracle: nodes on x2 = x1 - 1 with 0.5 <= x1 <= 1.5
  int expect = 0;
  for (int i = 1; i <= g.horizontal_points(); ++i) {
    const double x1 = i * dx;
    if (x1 >= 0.5 && x1 <= 1.5) ++expect;
  }
  CHECK(static_cast<int>(nodes.size()) == expect);
  for (int flat : nodes) {
    const int i = flat % g.horizontal_points() + 1;
    const int j = flat / g.horizontal_points() + 1;
    CHECK(j - i == 0);  // constant offset along the 45-degree line
  }
}

TEST_CASE("empty band is rejected") {
  const GridSpec g = grid_of(12);
  const DomainConfig dom = domain_of(10.0);
  ControlRegion band = ControlRegion::make_tilted_band(0.5, 1.5, 1.0, 0.0);
  band.start_x1 = 0.51;  // between nodes, zero width
  band.end_x1 = 0.52;
  CHECK_THROWS_AS(region_nodes(band, g, dom), std::invalid_argument);
}

TEST_CASE("mode operator: n = 0 decouples into Dirichlet Laplacian plus trace row") {
  auto [A, w] = assemble_mode_operator(0.0, 5.0, 10);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
  const int m = 10;
  const double d = 2.0 / (m + 1);
  for (int j = 0; j < m; ++j) {
    CHECK(dense(j, m) == 0.0);  // no h coupling
    CHECK(dense(j, j) == doctest::Approx(-2.0 / (d * d)));
  }
  CHECK(dense(m, m) == 0.0);
  CHECK(dense(m, m - 2) == doctest::Approx(-1.0 / (2.0 * d)));
  CHECK(w.weights.back() == 1.0);  // unit weight when the h block decouples
}

TEST_CASE("mode operator: critical sigma puts the top eigenvalue at -n^2") {
  const int n = 2;
  auto [A, w] = assemble_mode_operator(n * n, 2.0, 400);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A.mat);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense);
  double top = -1e300;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    top = std::max(top, es.eigenvalues()[i].real());
  CHECK(top == doctest::Approx(-4.0).epsilon(0.05));
}

TEST_CASE("mode operator requires at least three interior nodes") {
  CHECK_THROWS_AS(assemble_mode_operator(1.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("weighted symmetry defect of the mode operator shrinks with the mesh") {
  const double n_sq = 9.0, sigma = 4.0;
  auto defect = [&](int m) {
    auto [A, w] = assemble_mode_operator(n_sq, sigma, m);
    Eigen::MatrixXd WA = Eigen::MatrixXd(A.mat);
    for (int r = 0; r < WA.rows(); ++r) WA.row(r) *= w.weights[static_cast<std::size_t>(r)];
    return (WA - WA.transpose()).norm() / WA.norm();
  };
  const double d1 = defect(50), d2 = defect(200);
  CHECK(d2 < d1);
  CHECK(d2 < 0.05);
}

TEST_CASE("coordinate dump has one entry per stored value") {
  const GridSpec g = grid_of(3);
  const SparseOperator A = assemble_system(g, domain_of(1.0));
  const std::string txt = A.to_coordinate_text();
  const long lines = std::count(txt.begin(), txt.end(), '\n');
  CHECK(lines == static_cast<long>(A.mat.nonZeros()));
}
