#pragma once

// The parameter-space wave operator L and the normal derivative N acting on
// scaled Taylor coefficients, and their explicit matrices.
//
// Matrices act on the flattened coefficient vector with l1 varying fastest:
// index = l1 + (d+1) * l2.

#include "hermite/geometry.hpp"
#include "hermite/polyalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace hermite {

namespace detail {

// out(l1, l2) += k * scaled d^(o1) d^(o2) u, written only for l1, l2 <= od.
inline void add_derivative_product(const TaylorCoeffs2D& a, const TaylorCoeffs2D& u, int o1, int o2, int od,
                                   std::vector<double>& scratch, TaylorCoeffs2D& out)
{
  const int d1 = u.d1 - o1;
  const int d2 = u.d2 - o2;
  if (d1 < 0 || d2 < 0) return;
  // Skip identically zero coefficient polynomials.
  bool any = false;
  for (double v : a.c)
    if (v != 0.0) {
      any = true;
      break;
    }
  if (!any) return;
  scratch.assign(static_cast<std::size_t>((d1 + 1) * (d2 + 1)), 0.0);
  const double h1 = std::pow(u.hr, o1);
  const double h2 = std::pow(u.hs, o2);
  for (int l2 = 0; l2 <= d2; ++l2) {
    const double f2 = factorial(l2 + o2) / (factorial(l2) * h2);
    for (int l1 = 0; l1 <= d1; ++l1)
      scratch[static_cast<std::size_t>(l1 + (d1 + 1) * l2)] =
          u(l1 + o1, l2 + o2) * f2 * factorial(l1 + o1) / (factorial(l1) * h1);
  }
  accumulate_product(a.c, a.d1, a.d2, scratch, d1, d2, out.c, od, od);
}

inline int resolve_degree(const TaylorCoeffs2D& u, int out_degree)
{
  if (u.d1 != u.d2) throw std::invalid_argument("operator: square coefficient arrays expected");
  return out_degree < 0 ? u.d1 : std::min(out_degree, u.d1);
}

}  // namespace detail

/// w = L u with truncated products; output degree out_degree (default: input degree).
/// Output coefficients of degree l depend only on input coefficients of degree <= l + 2.
inline TaylorCoeffs2D apply_L(const MetricSet& ms, const TaylorCoeffs2D& u, int out_degree = -1)
{
  const int od = detail::resolve_degree(u, out_degree);
  TaylorCoeffs2D w = TaylorCoeffs2D::zeros_like(u, od, od);
  std::vector<double> scratch;
  detail::add_derivative_product(ms.a20, u, 2, 0, od, scratch, w);
  detail::add_derivative_product(ms.a11, u, 1, 1, od, scratch, w);
  detail::add_derivative_product(ms.a02, u, 0, 2, od, scratch, w);
  detail::add_derivative_product(ms.a10, u, 1, 0, od, scratch, w);
  detail::add_derivative_product(ms.a01, u, 0, 1, od, scratch, w);
  return w;
}

/// Cartesian L = c^2 (D_xx + D_yy) with the grid spacings taken from u.
inline TaylorCoeffs2D apply_L_cartesian(double c, const TaylorCoeffs2D& u, int out_degree = -1)
{
  const int od = detail::resolve_degree(u, out_degree);
  const int d = u.d1;
  TaylorCoeffs2D w = TaylorCoeffs2D::zeros_like(u, od, od);
  const double c2 = c * c;
  const double ix = c2 / (u.hr * u.hr);
  const double iy = c2 / (u.hs * u.hs);
  for (int l2 = 0; l2 <= od; ++l2)
    for (int l1 = 0; l1 <= od; ++l1) {
      double v = 0.0;
      if (l1 + 2 <= d) v += (l1 + 2) * (l1 + 1) * ix * u(l1 + 2, l2);
      if (l2 + 2 <= d) v += (l2 + 2) * (l2 + 1) * iy * u(l1, l2 + 2);
      w(l1, l2) = v;
    }
  return w;
}

/// Normal derivative b1 D_r u + b2 D_s u on the face with the given normal axis.
inline TaylorCoeffs2D apply_normal(const MetricSet& ms, Axis face_axis, const TaylorCoeffs2D& u, int out_degree = -1)
{
  const auto& nc = ms.normal[static_cast<std::size_t>(face_axis)];
  if (!nc) throw std::invalid_argument("apply_normal: metric set has no normal for this face");
  const int od = detail::resolve_degree(u, out_degree);
  TaylorCoeffs2D w = TaylorCoeffs2D::zeros_like(u, od, od);
  std::vector<double> scratch;
  detail::add_derivative_product(nc->b1, u, 1, 0, od, scratch, w);
  detail::add_derivative_product(nc->b2, u, 0, 1, od, scratch, w);
  return w;
}

enum class OperatorKind { L, N };

/// Column j is the operator applied to the j-th unit coefficient vector of degree d.
template <class Apply>
Eigen::MatrixXd operator_matrix_of(int d, double hr, double hs, Apply&& apply)
{
  const int n = (d + 1) * (d + 1);
  Eigen::MatrixXd M(n, n);
  TaylorCoeffs2D e(d, d, 0.0, 0.0, hr, hs);
  for (int j = 0; j < n; ++j) {
    std::fill(e.c.begin(), e.c.end(), 0.0);
    e.c[static_cast<std::size_t>(j)] = 1.0;
    const TaylorCoeffs2D w = apply(e);
    for (int i = 0; i < n; ++i) M(i, j) = w.c[static_cast<std::size_t>(i)];
  }
  return M;
}

/// Matrix of L (or of N on face_axis) for the node's metrics at degree d.
inline Eigen::MatrixXd operator_matrix(const MetricSet& ms, OperatorKind which, int d, Axis face_axis = Axis::r)
{
  const double hr = ms.a20.hr, hs = ms.a20.hs;
  const double r0 = ms.a20.r0, s0 = ms.a20.s0;
  return operator_matrix_of(d, hr, hs, [&](TaylorCoeffs2D e) {
    e.r0 = r0;
    e.s0 = s0;
    return which == OperatorKind::L ? apply_L(ms, e) : apply_normal(ms, face_axis, e);
  });
}

/// Cartesian L matrix at degree d for spacings (hx, hy).
inline Eigen::MatrixXd operator_matrix_cartesian(double c, int d, double hx, double hy)
{
  return operator_matrix_of(d, hx, hy, [&](const TaylorCoeffs2D& e) { return apply_L_cartesian(c, e); });
}

}  // namespace hermite
