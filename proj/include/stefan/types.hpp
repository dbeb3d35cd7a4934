#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stefan {

/// Geometry and physical parameters of the periodic strip problem.
///
/// The strip is (0, L) x (-1, 1), periodic in x1. The theory is usually
/// stated on the 2*pi torus; the numerics default to L = 2. sigma and L are
/// independent knobs, no rescaling between them is applied.
struct DomainConfig {
  double period = 2.0;   ///< horizontal period L > 0
  double sigma = 10.0;   ///< surface tension coefficient, >= 0
  double horizon = 0.1;  ///< time horizon T > 0

  void validate() const {
    if (!(period > 0.0)) throw std::invalid_argument("domain: period must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("domain: horizon must be > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("domain: sigma must be >= 0");
  }
};

/// Uniform grid with equal horizontal and vertical mesh size.
///
/// dx = L / (nx + 1); unknowns are y at (nx+1) x mv interior nodes and h at
/// nx+1 nodes, where mv is the vertical interior count (equal to nx when
/// L = 2, the paper's square choice). x1^i = i*dx (i = 1..nx+1, periodic),
/// x2^j = -1 + j*dx (j = 1..mv interior).
struct GridSpec {
  int nx = 12;   ///< horizontal interior count; nx = L/dx - 1
  int nt = 200;  ///< time steps
  int mv = -1;   ///< vertical interior count; -1 means "= nx" (L = 2 case)

  int vertical() const { return mv < 0 ? nx : mv; }

  void validate() const {
    if (nx < 2) throw std::invalid_argument("grid: nx must be >= 2");
    if (vertical() < 2) throw std::invalid_argument("grid: vertical count must be >= 2");
    if (nt < 1) throw std::invalid_argument("grid: nt must be >= 1");
  }

  /// Check the equal-mesh constraint: 2/dx must land on an integer so the
  /// vertical interval (-1,1) is resolved by the same mesh size.
  void validate_against(const DomainConfig& dom) const {
    validate();
    const double want = 2.0 / dx(dom) - 1.0;
    if (std::abs(want - vertical()) > 1e-9)
      throw std::invalid_argument(
          "grid: vertical count must equal 2/dx - 1 (equal horizontal/vertical mesh)");
  }

  double dx(const DomainConfig& dom) const { return dom.period / (nx + 1); }
  double dt(const DomainConfig& dom) const { return dom.horizon / nt; }

  int horizontal_points() const { return nx + 1; }                 // i = 1..nx+1
  int y_unknowns() const { return (nx + 1) * vertical(); }         // interior y
  int state_dim() const { return y_unknowns() + nx + 1; }          // y then h

  /// Flattening: z = (y_[1], ..., y_[mv], h), y_[j] = (y_{1,j}, .., y_{nx+1,j}).
  int y_index(int i, int j) const { return (j - 1) * (nx + 1) + (i - 1); }
  int h_index(int i) const { return y_unknowns() + (i - 1); }

  double x1(int i, const DomainConfig& dom) const { return i * dx(dom); }
  double x2(int j, const DomainConfig& dom) const { return -1.0 + j * dx(dom); }
};

/// Discrete state: interior temperature samples plus boundary height samples.
/// Boundary rows y_{i,0} = 0 and y_{i,nx+1} = sigma * D2 h are derived from h
/// on demand and never stored.
struct State {
  std::vector<double> y;  ///< size (nx+1)*nx, flattened per vertical slice
  std::vector<double> h;  ///< size nx+1

  static State zero(const GridSpec& g) {
    State s;
    s.y.assign(static_cast<std::size_t>(g.y_unknowns()), 0.0);
    s.h.assign(static_cast<std::size_t>(g.horizontal_points()), 0.0);
    return s;
  }

  bool matches(const GridSpec& g) const {
    return y.size() == static_cast<std::size_t>(g.y_unknowns()) &&
           h.size() == static_cast<std::size_t>(g.horizontal_points());
  }

  std::vector<double> flatten() const {
    std::vector<double> z(y);
    z.insert(z.end(), h.begin(), h.end());
    return z;
  }

  static State unflatten(const std::vector<double>& z, const GridSpec& g) {
    State s;
    s.y.assign(z.begin(), z.begin() + g.y_unknowns());
    s.h.assign(z.begin() + g.y_unknowns(), z.end());
    return s;
  }
};

/// Control support region.
struct ControlRegion {
  enum class Kind { rectangle, tilted_band };
  Kind kind = Kind::tilted_band;

  // rectangle(a, b) x (c, d)
  double a = 0.0, b = 2.0, c = -0.5, d = 0.2;

  // tilted band: segment from x1 = start_x1 to end_x1 with the given slope,
  // passing through ((start+end)/2, 0); nodes within half_width*dx are kept.
  double start_x1 = 0.5, end_x1 = 1.5, slope = 1.0, half_width = 1.5;

  static ControlRegion make_rectangle(double a, double b, double c, double d) {
    ControlRegion r;
    r.kind = Kind::rectangle;
    r.a = a; r.b = b; r.c = c; r.d = d;
    return r;
  }
  static ControlRegion make_tilted_band(double s, double e, double slope, double hw) {
    ControlRegion r;
    r.kind = Kind::tilted_band;
    r.start_x1 = s; r.end_x1 = e; r.slope = slope; r.half_width = hw;
    return r;
  }
};

/// Nodal control values on the discrete control set, one slice per time node.
struct ControlField {
  int slices = 0;         ///< nt + 1
  int support_size = 0;   ///< |omega_nx|
  std::vector<double> u;  ///< slices * support_size, slice-major

  static ControlField zero(int slices, int support) {
    ControlField f;
    f.slices = slices;
    f.support_size = support;
    f.u.assign(static_cast<std::size_t>(slices) * support, 0.0);
    return f;
  }
  double* slice(int k) { return u.data() + static_cast<std::size_t>(k) * support_size; }
  const double* slice(int k) const { return u.data() + static_cast<std::size_t>(k) * support_size; }
};

}  // namespace stefan
