#pragma once

// Mappings x = G(r) from the unit square, their Jacobians, and the per-node
// Taylor polynomials of the parameter-space wave operator coefficients.

#include "hermite/polyalg.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hermite {

using Vec2 = std::array<double, 2>;
/// J[i][j] = d x_i / d r_j.
using Mat2 = std::array<std::array<double, 2>, 2>;

enum class MapKind { identity, polynomial, tanh, rhombus, xmap, annulus, custom };

struct Mapping {
  MapKind kind = MapKind::identity;
  double alpha = 0.5;  // polynomial weight; rhombus first shear
  double beta = 0.1;   // rhombus second shear; tanh steepness; xmap amplitude
  double amp = -0.15;  // tanh amplitude a
  double r0 = 0.5;     // tanh center
  double ra = 0.5;
  double rb = 1.0;
  std::function<Vec2(Vec2)> fn;  // custom only

  static Mapping identity() { return {}; }
  static Mapping polynomial(double alpha = 0.5)
  {
    Mapping g;
    g.kind = MapKind::polynomial;
    g.alpha = alpha;
    return g;
  }
  static Mapping tanh(double a = -0.15, double beta = 5.0, double r0 = 0.5)
  {
    Mapping g;
    g.kind = MapKind::tanh;
    g.amp = a;
    g.beta = beta;
    g.r0 = r0;
    return g;
  }
  static Mapping rhombus(double alpha = 0.1, double beta = 0.1)
  {
    Mapping g;
    g.kind = MapKind::rhombus;
    g.alpha = alpha;
    g.beta = beta;
    return g;
  }
  static Mapping xmap(double beta = 0.2)
  {
    Mapping g;
    g.kind = MapKind::xmap;
    g.beta = beta;
    return g;
  }
  static Mapping annulus(double ra = 0.5, double rb = 1.0)
  {
    Mapping g;
    g.kind = MapKind::annulus;
    g.ra = ra;
    g.rb = rb;
    return g;
  }
  static Mapping custom(std::function<Vec2(Vec2)> f)
  {
    Mapping g;
    g.kind = MapKind::custom;
    g.fn = std::move(f);
    return g;
  }

  bool is_identity() const { return kind == MapKind::identity; }
  /// Periodic in r2 (annulus).
  bool periodic_s() const { return kind == MapKind::annulus; }
};

inline std::string to_string(MapKind k)
{
  switch (k) {
    case MapKind::identity: return "identity";
    case MapKind::polynomial: return "polynomial";
    case MapKind::tanh: return "tanh";
    case MapKind::rhombus: return "rhombus";
    case MapKind::xmap: return "xmap";
    case MapKind::annulus: return "annulus";
    case MapKind::custom: return "custom";
  }
  return "unknown";
}

namespace detail {

inline double tanh_alpha(const Mapping& g)
{
  return 1.0 - g.amp * (std::tanh(g.beta * (1.0 - g.r0)) - std::tanh(-g.beta * g.r0));
}

inline double tanh_1d(const Mapping& g, double r)
{
  return tanh_alpha(g) * r + g.amp * (std::tanh(g.beta * (r - g.r0)) - std::tanh(-g.beta * g.r0));
}

inline double tanh_1d_deriv(const Mapping& g, double r)
{
  const double t = std::tanh(g.beta * (r - g.r0));
  return tanh_alpha(g) + g.amp * g.beta * (1.0 - t * t);
}

constexpr double two_pi = 6.283185307179586476925286766559;

}  // namespace detail

inline Vec2 map_eval(const Mapping& g, Vec2 r)
{
  const double r1 = r[0];
  const double r2 = r[1];
  switch (g.kind) {
    case MapKind::identity: return r;
    case MapKind::polynomial:
      return {g.alpha * r1 + (1.0 - g.alpha) * r1 * r1, g.alpha * r2 + (1.0 - g.alpha) * r2 * r2};
    case MapKind::tanh: return {detail::tanh_1d(g, r1), detail::tanh_1d(g, r2)};
    case MapKind::rhombus: return {(1.0 - g.alpha) * r1 + g.alpha * r2, (1.0 - g.beta) * r2 + g.beta * r1};
    case MapKind::xmap:
      return {r1 + g.beta * r2 * (1.0 - r2) * std::sin(detail::two_pi * r1),
              r2 + g.beta * r1 * (1.0 - r1) * std::sin(detail::two_pi * r2)};
    case MapKind::annulus: {
      const double rho = g.ra + (g.rb - g.ra) * r1;
      const double th = detail::two_pi * r2;
      return {rho * std::cos(th), rho * std::sin(th)};
    }
    case MapKind::custom: return g.fn(r);
  }
  return r;
}

inline double det(const Mat2& J) { return J[0][0] * J[1][1] - J[0][1] * J[1][0]; }

/// Analytic dx/dr. Custom mappings are differentiated through a local degree-6 fit.
inline Mat2 jacobian(const Mapping& g, Vec2 r)
{
  const double r1 = r[0];
  const double r2 = r[1];
  Mat2 J{};
  switch (g.kind) {
    case MapKind::identity: J = {{{1.0, 0.0}, {0.0, 1.0}}}; break;
    case MapKind::polynomial:
      J = {{{g.alpha + 2.0 * (1.0 - g.alpha) * r1, 0.0}, {0.0, g.alpha + 2.0 * (1.0 - g.alpha) * r2}}};
      break;
    case MapKind::tanh: J = {{{detail::tanh_1d_deriv(g, r1), 0.0}, {0.0, detail::tanh_1d_deriv(g, r2)}}}; break;
    case MapKind::rhombus: J = {{{1.0 - g.alpha, g.alpha}, {g.beta, 1.0 - g.beta}}}; break;
    case MapKind::xmap: {
      const double tp = detail::two_pi;
      J[0][0] = 1.0 + g.beta * r2 * (1.0 - r2) * tp * std::cos(tp * r1);
      J[0][1] = g.beta * (1.0 - 2.0 * r2) * std::sin(tp * r1);
      J[1][0] = g.beta * (1.0 - 2.0 * r1) * std::sin(tp * r2);
      J[1][1] = 1.0 + g.beta * r1 * (1.0 - r1) * tp * std::cos(tp * r2);
      break;
    }
    case MapKind::annulus: {
      const double rho = g.ra + (g.rb - g.ra) * r1;
      const double th = detail::two_pi * r2;
      J[0][0] = (g.rb - g.ra) * std::cos(th);
      J[1][0] = (g.rb - g.ra) * std::sin(th);
      J[0][1] = -detail::two_pi * rho * std::sin(th);
      J[1][1] = detail::two_pi * rho * std::cos(th);
      break;
    }
    case MapKind::custom: {
      constexpr double h = 1e-2;
      for (int i = 0; i < 2; ++i) {
        auto comp = [&](double a, double b) { return g.fn({a, b})[static_cast<std::size_t>(i)]; };
        const auto p = fit_taylor_2d(6, {r1, r2}, {h, h}, comp);
        J[static_cast<std::size_t>(i)][0] = p(1, 0) / h;
        J[static_cast<std::size_t>(i)][1] = p(0, 1) / h;
      }
      break;
    }
  }
  if (std::abs(det(J)) < 1e-12) {
    std::ostringstream msg;
    msg << "singular mapping: |det J| < 1e-12 at r = (" << r1 << ", " << r2 << ") for " << to_string(g.kind);
    throw std::domain_error(msg.str());
  }
  return J;
}

/// Inverse metrics {r_x, r_y, s_x, s_y} at r.
inline std::array<double, 4> inverse_metrics(const Mapping& g, Vec2 r)
{
  const Mat2 J = jacobian(g, r);
  const double d = det(J);
  return {J[1][1] / d, -J[0][1] / d, -J[1][0] / d, J[0][0] / d};
}

/// Coefficients of the normal derivative d/dn = b1 d/dr + b2 d/ds on one face.
struct NormalCoeffs {
  TaylorCoeffs2D b1;
  TaylorCoeffs2D b2;
};

/// Operator coefficients at one node: L = a20 D_rr + a11 D_rs + a02 D_ss + a10 D_r + a01 D_s.
/// normal[0] is for an r = const face, normal[1] for an s = const face.
struct MetricSet {
  TaylorCoeffs2D a20, a11, a02, a10, a01;
  std::array<std::optional<NormalCoeffs>, 2> normal;
  int degree() const { return a20.d1; }
};

/// Outward side of a boundary face: 0 for r = 0 (or s = 0), 1 for r = 1 (or s = 1).
struct FaceTag {
  Axis axis;
  int side;
};

/// Fit the operator coefficients on the cell centered at `center` with the node's spacings.
/// `faces` lists the boundary faces the node lies on (zero, one or two).
inline MetricSet metric_polys(const Mapping& g, Vec2 center, Vec2 spacings, double c, int m,
                              std::span<const FaceTag> faces = {})
{
  const int q = 2 * m + 1;
  const std::pair<double, double> ctr{center[0], center[1]};
  const std::pair<double, double> sp{spacings[0], spacings[1]};
  const double c2 = c * c;

  // Sample inverse metrics once on the tensor Chebyshev grid.
  const auto z = chebyshev_points(q);
  const auto n = static_cast<std::size_t>(q + 1);
  std::vector<std::array<double, 4>> im(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      im[i + n * j] = inverse_metrics(g, {center[0] + spacings[0] * z[i], center[1] + spacings[1] * z[j]});
  std::vector<double> buf(n * n);
  auto fit = [&](auto&& value) {
    for (std::size_t k = 0; k < n * n; ++k) buf[k] = value(im[k]);
    return fit_taylor_2d_samples(q, ctr, sp, buf);
  };

  MetricSet ms;
  ms.a20 = fit([&](const auto& v) { return c2 * (v[0] * v[0] + v[1] * v[1]); });
  ms.a02 = fit([&](const auto& v) { return c2 * (v[2] * v[2] + v[3] * v[3]); });
  ms.a11 = fit([&](const auto& v) { return 2.0 * c2 * (v[0] * v[2] + v[1] * v[3]); });

  const auto rx = fit([](const auto& v) { return v[0]; });
  const auto ry = fit([](const auto& v) { return v[1]; });
  const auto sx = fit([](const auto& v) { return v[2]; });
  const auto sy = fit([](const auto& v) { return v[3]; });
  const std::pair<int, int> dq{q, q};
  auto lap = [&](const TaylorCoeffs2D& fx, const TaylorCoeffs2D& fy) {
    // d/dx f_x + d/dy f_y via the chain rule on the fitted polynomials.
    auto t = mul_trunc(diff_scaled(fx, Axis::r, 1), rx, dq) + mul_trunc(diff_scaled(fx, Axis::s, 1), sx, dq) +
             mul_trunc(diff_scaled(fy, Axis::r, 1), ry, dq) + mul_trunc(diff_scaled(fy, Axis::s, 1), sy, dq);
    return (c2 * t).truncated(q, q);
  };
  ms.a10 = lap(rx, ry);
  ms.a01 = lap(sx, sy);

  for (const FaceTag& f : faces) {
    const double sigma = f.side == 0 ? -1.0 : 1.0;
    NormalCoeffs nc;
    if (f.axis == Axis::r) {
      nc.b1 = fit([&](const auto& v) { return sigma * std::hypot(v[0], v[1]); });
      nc.b2 = fit([&](const auto& v) { return sigma * (v[0] * v[2] + v[1] * v[3]) / std::hypot(v[0], v[1]); });
    } else {
      nc.b1 = fit([&](const auto& v) { return sigma * (v[0] * v[2] + v[1] * v[3]) / std::hypot(v[2], v[3]); });
      nc.b2 = fit([&](const auto& v) { return sigma * std::hypot(v[2], v[3]); });
    }
    ms.normal[static_cast<std::size_t>(f.axis)] = std::move(nc);
  }
  return ms;
}

/// Constant-coefficient metric set (used by the solvability probe and Cartesian grids).
inline MetricSet constant_metrics(int degree, Vec2 center, Vec2 spacings, double a20, double a11, double a02, double a10,
                                  double a01)
{
  auto k = [&](double v) {
    TaylorCoeffs2D p(degree, degree, center[0], center[1], spacings[0], spacings[1]);
    p(0, 0) = v;
    return p;
  };
  MetricSet ms;
  ms.a20 = k(a20);
  ms.a11 = k(a11);
  ms.a02 = k(a02);
  ms.a10 = k(a10);
  ms.a01 = k(a01);
  ms.normal[0] = NormalCoeffs{k(-1.0), k(0.0)};
  ms.normal[1] = NormalCoeffs{k(0.0), k(-1.0)};
  return ms;
}

}  // namespace hermite
