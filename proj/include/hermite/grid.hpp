#pragma once

// Staggered primal (node-centered) and dual (cell-centered) grids on the unit
// square, Hermite degree-of-freedom fields, and Hermite interpolation between them.

#include "hermite/geometry.hpp"
#include "hermite/polyalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hermite {

struct GridSpec {
  int N1 = 10;
  int N2 = 10;
  bool periodic_r = false;
  bool periodic_s = false;

  double dr() const { return 1.0 / N1; }
  double ds() const { return 1.0 / N2; }
  Vec2 spacings() const { return {dr(), ds()}; }

  void validate() const
  {
    if (N1 < 2 || N2 < 2) throw std::invalid_argument("GridSpec: cell counts must be >= 2");
  }
};

enum class Location { primal, dual };

inline int node_count(const GridSpec& g, Location loc, Axis a)
{
  const bool per = a == Axis::r ? g.periodic_r : g.periodic_s;
  const int N = a == Axis::r ? g.N1 : g.N2;
  if (loc == Location::dual || per) return N;
  return N + 1;
}

inline Vec2 node_coord(const GridSpec& g, Location loc, int i, int j)
{
  const double off = loc == Location::dual ? 0.5 : 0.0;
  return {(i + off) * g.dr(), (j + off) * g.ds()};
}

/// One TaylorCoeffs2D per node of a primal or dual grid, each centered at its node.
struct HermiteField {
  GridSpec grid;
  Location loc = Location::primal;
  int n1 = 0;
  int n2 = 0;
  int degree = 0;
  std::vector<TaylorCoeffs2D> nodes;

  HermiteField() = default;
  HermiteField(const GridSpec& g, Location l, int deg) : grid(g), loc(l), degree(deg)
  {
    n1 = node_count(g, l, Axis::r);
    n2 = node_count(g, l, Axis::s);
    nodes.reserve(static_cast<std::size_t>(n1 * n2));
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) {
        const Vec2 x = node_coord(g, l, i, j);
        nodes.emplace_back(deg, deg, x[0], x[1], g.dr(), g.ds());
      }
  }

  TaylorCoeffs2D& at(int i, int j) { return nodes[static_cast<std::size_t>(i + n1 * j)]; }
  const TaylorCoeffs2D& at(int i, int j) const { return nodes[static_cast<std::size_t>(i + n1 * j)]; }

  /// A primal node whose coefficients are owned by boundary conditions.
  bool is_boundary(int i, int j) const
  {
    if (loc == Location::dual) return false;
    const bool br = !grid.periodic_r && (i == 0 || i == n1 - 1);
    const bool bs = !grid.periodic_s && (j == 0 || j == n2 - 1);
    return br || bs;
  }
};

/// Copy of f with every node restricted (or zero-padded) to degree d.
inline HermiteField truncate_field(const HermiteField& f, int d)
{
  HermiteField out = f;
  out.degree = d;
  for (auto& p : out.nodes) p = p.truncated(d, d);
  return out;
}

namespace detail {

// Inverse of the 1-D Hermite interpolation matrix for degree m, stored column-major
// with size n = 2(m+1). Column block 0..m acts on left data, m+1..2m+1 on right data.
inline const std::vector<double>& hermite_inverse(int m)
{
  constexpr int max_cached = 16;
  if (m < 0 || m >= max_cached) throw std::out_of_range("hermite_inverse: degree out of range");
  static std::array<std::vector<double>, max_cached> cache;
  static std::array<std::once_flag, max_cached> flags;
  std::call_once(flags[static_cast<std::size_t>(m)], [m] {
    const int n = 2 * (m + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int side = 0; side < 2; ++side) {
      const double x = side == 0 ? -0.5 : 0.5;
      for (int a = 0; a <= m; ++a)
        for (int l = a; l < n; ++l) A(side * (m + 1) + a, l) = binomial(l, a) * std::pow(x, l - a);
    }
    Eigen::MatrixXd Ai = A.partialPivLu().inverse();
    auto& v = cache[static_cast<std::size_t>(m)];
    v.assign(Ai.data(), Ai.data() + n * n);
  });
  return cache[static_cast<std::size_t>(m)];
}

// out[l*os] = sum_a Ainv(l, a) left[a*ls] + Ainv(l, m+1+a) right[a*rs], l = 0..2m+1.
inline void interp_1d_raw(int m, const double* left, int ls, const double* right, int rs, double* out, int os)
{
  const auto& Ai = hermite_inverse(m);
  const int n = 2 * (m + 1);
  for (int l = 0; l < n; ++l) {
    double v = 0.0;
    for (int a = 0; a <= m; ++a)
      v += Ai[static_cast<std::size_t>(l + n * a)] * left[a * ls] +
           Ai[static_cast<std::size_t>(l + n * (m + 1 + a))] * right[a * rs];
    out[l * os] = v;
  }
}

}  // namespace detail

/// Degree-(2m+1) interpolant centered midway between two nodes one spacing apart,
/// matching scaled derivatives 0..m at each node.
inline TaylorCoeffs1D hermite_interp_1d(const TaylorCoeffs1D& left, const TaylorCoeffs1D& right)
{
  const int m = left.degree();
  if (right.degree() != m) throw std::invalid_argument("hermite_interp_1d: degree mismatch");
  if (std::abs(left.spacing - right.spacing) > 1e-14 * left.spacing ||
      std::abs(right.center - left.center - left.spacing) > 1e-12 * left.spacing)
    throw std::invalid_argument("hermite_interp_1d: nodes must be one spacing apart");
  TaylorCoeffs1D out(2 * m + 1, 0.5 * (left.center + right.center), left.spacing);
  detail::interp_1d_raw(m, left.coeffs.data(), 1, right.coeffs.data(), 1, out.coeffs.data(), 1);
  return out;
}

/// Interpolant from the four corner polynomials (bl, br, tl, tr) of the cell centered
/// at `center`, using their coefficients of degree <= m per axis.
inline TaylorCoeffs2D hermite_interp_cell(int m, const TaylorCoeffs2D& bl, const TaylorCoeffs2D& br,
                                          const TaylorCoeffs2D& tl, const TaylorCoeffs2D& tr, Vec2 center)
{
  const int n = 2 * m + 2;
  TaylorCoeffs2D out(n - 1, n - 1, center[0], center[1], bl.hr, bl.hs);
  // Along r at the bottom (rows 0..m) and top (rows m+1..2m+1) levels: tmp(l1, level*(m+1)+l2).
  std::vector<double> tmp(static_cast<std::size_t>(n * n));
  const TaylorCoeffs2D* lr[2][2] = {{&bl, &br}, {&tl, &tr}};
  for (int level = 0; level < 2; ++level) {
    const TaylorCoeffs2D& L = *lr[level][0];
    const TaylorCoeffs2D& R = *lr[level][1];
    for (int l2 = 0; l2 <= m; ++l2)
      detail::interp_1d_raw(m, &L.c[static_cast<std::size_t>(L.stride() * l2)], 1,
                            &R.c[static_cast<std::size_t>(R.stride() * l2)], 1,
                            &tmp[static_cast<std::size_t>(n * (level * (m + 1) + l2))], 1);
  }
  for (int l1 = 0; l1 < n; ++l1)
    detail::interp_1d_raw(m, &tmp[static_cast<std::size_t>(l1)], n,
                          &tmp[static_cast<std::size_t>(l1 + n * (m + 1))], n, &out.c[static_cast<std::size_t>(l1)],
                          n);
  return out;
}

namespace detail {

inline int wrap(int k, int n, bool periodic)
{
  if (!periodic) return k;
  return ((k % n) + n) % n;
}

}  // namespace detail

/// Interpolant at node (i, j) of the grid opposite to src's location.
/// Throws std::out_of_range when a neighbor is missing (non-periodic boundary).
inline TaylorCoeffs2D hermite_interp_node(const HermiteField& src, int m, int i, int j)
{
  const GridSpec& g = src.grid;
  const Location tloc = src.loc == Location::primal ? Location::dual : Location::primal;
  // Lower-left source index of the target's surrounding cell.
  const int i0 = tloc == Location::dual ? i : i - 1;
  const int j0 = tloc == Location::dual ? j : j - 1;
  const int a0 = detail::wrap(i0, src.n1, g.periodic_r), a1 = detail::wrap(i0 + 1, src.n1, g.periodic_r);
  const int b0 = detail::wrap(j0, src.n2, g.periodic_s), b1 = detail::wrap(j0 + 1, src.n2, g.periodic_s);
  if (a0 < 0 || b0 < 0 || a1 >= src.n1 || b1 >= src.n2) {
    std::ostringstream msg;
    msg << "hermite_interp: node (" << i << ", " << j << ") lacks a neighbor on the source grid";
    throw std::out_of_range(msg.str());
  }
  if (src.degree < m) throw std::invalid_argument("hermite_interp: source degree below m");
  return hermite_interp_cell(m, src.at(a0, b0), src.at(a1, b0), src.at(a0, b1), src.at(a1, b1),
                             node_coord(g, tloc, i, j));
}

/// Interpolate to the opposite grid. Targets lacking neighbors (boundary primal nodes)
/// are left as zero polynomials of degree 2m+1.
inline HermiteField hermite_interp_2d(const HermiteField& src, int m)
{
  const Location tloc = src.loc == Location::primal ? Location::dual : Location::primal;
  HermiteField out(src.grid, tloc, 2 * m + 1);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < out.n2; ++j)
    for (int i = 0; i < out.n1; ++i) {
      if (out.is_boundary(i, j)) continue;
      out.at(i, j) = hermite_interp_node(src, m, i, j);
    }
  return out;
}

/// Smallest physical distance between neighboring primal nodes.
inline double dx_min(const Mapping& g, const GridSpec& spec)
{
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec2> x(static_cast<std::size_t>((spec.N1 + 1) * (spec.N2 + 1)));
  auto id = [&](int i, int j) { return static_cast<std::size_t>(i + (spec.N1 + 1) * j); };
  for (int j = 0; j <= spec.N2; ++j)
    for (int i = 0; i <= spec.N1; ++i) x[id(i, j)] = map_eval(g, node_coord(spec, Location::primal, i, j));
  auto dist = [](Vec2 a, Vec2 b) { return std::hypot(a[0] - b[0], a[1] - b[1]); };
  for (int j = 0; j <= spec.N2; ++j)
    for (int i = 0; i <= spec.N1; ++i) {
      if (i < spec.N1) best = std::min(best, dist(x[id(i, j)], x[id(i + 1, j)]));
      if (j < spec.N2) best = std::min(best, dist(x[id(i, j)], x[id(i, j + 1)]));
    }
  return best;
}

/// dt = C_CFL dxmin / c; with t_final, reduced so that t_final is a whole number of steps.
inline double choose_dt(double c, double dxmin, double cfl, std::optional<double> t_final = std::nullopt)
{
  if (!(c > 0.0) || !(dxmin > 0.0) || !(cfl > 0.0)) throw std::invalid_argument("choose_dt: inputs must be positive");
  double dt = cfl * dxmin / c;
  if (t_final) {
    if (!(*t_final > 0.0)) throw std::invalid_argument("choose_dt: t_final must be positive");
    const double steps = std::ceil(*t_final / dt - 1e-10);
    dt = *t_final / steps;
  }
  return dt;
}

inline int step_count(double t_final, double dt) { return static_cast<int>(std::llround(t_final / dt)); }

}  // namespace hermite
