#pragma once

#include <string>
#include <vector>

#include "stefan/types.hpp"

namespace stefan {

/// Mean curvature kappa(h) = h'' / (1 + |h'|^2)^{3/2} evaluated with periodic
/// centered differences. The denominator uses the same centered first
/// difference as the nonlinear boundary term so that N3 vanishes cleanly as
/// amplitudes shrink at fixed grid.
std::vector<double> curvature(const std::vector<double>& h, double dx);

/// N3(h) = sigma * (kappa(h) - D2 h): the cubic-order boundary remainder left
/// after linearizing the Gibbs-Thomson condition. Identically zero when
/// sigma = 0.
std::vector<double> nonlinear_boundary_term(const std::vector<double>& h, double sigma, double dx);

/// Named initial data.
///  - "zero": rest state
///  - "fig_hum": h0 = x1(2-x1), y0 = 70 sin(pi x1) sin(pi x2)
///  - single_mode(n, k): data supported on one horizontal Fourier mode
State preset_initial_data(const std::string& name, const GridSpec& grid, const DomainConfig& dom);
State preset_single_mode(int n, int k, const GridSpec& grid, const DomainConfig& dom);

/// Discrete energy E = dx^2 sum y^2 + sigma/dx sum (h_{i+1}-h_i)^2,
/// the rectangle-rule analogue of the dissipated quantity.
double discrete_energy(const State& s, double sigma, double dx);

/// L2-type state norms used for reporting and tolerances.
double y_l2_norm(const State& s, double dx);
/// sqrt(dx sum h^2 + sigma/dx sum (Dh)^2): the H1-weighted height norm.
double h_norm(const State& s, double sigma, double dx);
/// Reference magnitude of a state: sqrt(y_l2^2 + h_norm^2).
double state_norm(const State& s, double sigma, double dx);

}  // namespace stefan
