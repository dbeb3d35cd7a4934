#pragma once

#include <Eigen/Sparse>
#include <string>
#include <utility>
#include <vector>

#include "stefan/types.hpp"

namespace stefan {

/// Sparse matrix in row-compressed form with the block layout of the coupled
/// system: y columns come in nx slices of nx+1 entries, then the h block.
/// Duplicate (row, col) contributions are summed at consolidation.
struct SparseOperator {
  Eigen::SparseMatrix<double> mat;  // compressed, duplicates summed

  int rows() const { return static_cast<int>(mat.rows()); }
  int cols() const { return static_cast<int>(mat.cols()); }

  // named index ranges: [begin, end)
  struct Block {
    int begin = 0;
    int end = 0;
  };
  std::vector<Block> y_slices;  // one per vertical slice j
  Block h_block;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return mat * v; }

  /// Coordinate-format dump, 1-based indices, one "row col value" per line.
  std::string to_coordinate_text() const;
};

/// Diagonal weights of the mode-n metric: dx on interior y nodes, sigma*n^2
/// on the h entry (1 when the h weight would vanish).
struct WeightedMetric {
  std::vector<double> weights;

  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double norm(const Eigen::VectorXd& a) const;
};

/// Full coupled operator A_{nx} of the finite-difference scheme: 5-point
/// Laplacian with periodic wrap in i, Gibbs-Thomson boundary row substituted
/// into the top slice, and h rows carrying the centered Neumann trace.
SparseOperator assemble_system(const GridSpec& grid, const DomainConfig& dom);

/// Discrete control set: flattened y indices of the region's nodes, in
/// (i, j) lexicographic order. Throws if the region discretizes to nothing.
std::vector<int> region_nodes(const ControlRegion& region, const GridSpec& grid,
                              const DomainConfig& dom);

/// 0/1 injection B mapping control slots to interior y rows; h rows get zero.
SparseOperator assemble_control_injection(const GridSpec& grid, const ControlRegion& region,
                                          const DomainConfig& dom);

/// Which horizontal multiplier the 1D mode operator uses for "n^2":
/// the continuous wavenumber squared, or the discrete symbol of the grid's
/// second difference (the latter makes the operator match the DFT block of
/// assemble_system exactly).
enum class HorizontalSymbol { continuous, discrete_grid };

/// 1D mode operator on (-1,1) with m interior nodes: tridiagonal part
/// y'' - n^2 y with the boundary value y(m+1) = -sigma n^2 h substituted,
/// plus the h row from the centered Neumann trace. Returns the operator and
/// the weighted metric it is (asymptotically) self-adjoint in.
///
/// `n_sq` is the effective multiplier; for the continuous operator of mode n
/// on the 2pi torus pass n*n. When matching a 2D grid pass the discrete
/// symbol (see `mode_symbol`).
std::pair<SparseOperator, WeightedMetric> assemble_mode_operator(double n_sq, double sigma, int m);

/// Discrete symbol of -d^2/dx1^2 at integer mode n on the periodic grid:
/// (2 - 2 cos(2 pi n / (nx+1))) / dx^2.
double mode_symbol(int n, const GridSpec& grid, const DomainConfig& dom);

/// Continuous wavenumber squared of integer mode n for period L: (2 pi n/L)^2.
double continuous_symbol(int n, const DomainConfig& dom);

}  // namespace stefan
