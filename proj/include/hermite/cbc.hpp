#pragma once

// Compatibility boundary conditions: the dense systems that fix the degree-(2m+1)
// polynomial at a primal boundary node (face or corner) from neighboring dual data
// and boundary data, plus conditioning and solvability diagnostics.
//
// CBC rows are kept in derivative form (the row applied to the coefficient vector
// is a physical-parameter derivative of the boundary condition), then every row is
// divided by its largest entry. Neumann rows use the coordinate orientation, i.e.
// the outward normal derivative times -1 on the r=0 and s=0 faces.

#include "hermite/geometry.hpp"
#include "hermite/operator.hpp"
#include "hermite/polyalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermite {

enum class Bc { dirichlet, neumann, periodic };

inline std::string to_string(Bc b)
{
  switch (b) {
    case Bc::dirichlet: return "D";
    case Bc::neumann: return "N";
    case Bc::periodic: return "P";
  }
  return "?";
}

/// A boundary face of the unit square: axis normal to it and side 0 (low) or 1 (high).
struct FaceBc {
  Axis axis = Axis::r;
  int side = 0;
  Bc type = Bc::dirichlet;
};

/// Which pair of D-N corner rows is merged by averaging, as (Neumann-face order, Dirichlet-face order).
enum class DnAverage {
  n2q_d2q1,  // (2q, 2q+1)
  n2q1_d2q   // (2q+1, 2q)
};

enum class RowKind { interp, cbc, averaged };

struct RowTag {
  RowKind kind = RowKind::interp;
  int nb = 0;     // interp: neighbor index
  int alpha = 0;  // interp: derivative order in r; cbc: tangential order on `face`
  int beta = 0;   // interp: derivative order in s; averaged: tangential order on face 1
  int q = 0;
  int face = 0;  // index into CbcSystem::faces
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CbcSystem {
  int m = 1;
  std::vector<FaceBc> faces;
  std::vector<Vec2> neighbor_offsets;  // dual neighbor positions in units of (hr, hs)
  std::vector<RowTag> rows;
  Eigen::MatrixXd raw;  // before scaling
  Eigen::VectorXd row_scale;
  Eigen::MatrixXd M;  // row scaled
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double hr = 1.0, hs = 1.0;
  std::string label;

  int size() const { return static_cast<int>(M.rows()); }
};

/// Per-node operator matrices at degree 2m+1: L_H and the normal derivative for
/// each face axis, already in coordinate orientation.
struct CbcOperators {
  double hr = 1.0, hs = 1.0;
  Eigen::MatrixXd L;
  std::array<Eigen::MatrixXd, 2> N;
};

namespace detail {

inline int flat(int l1, int l2, int d) { return l1 + (d + 1) * l2; }

inline std::vector<int> set_Mq(int m, int q)
{
  std::vector<int> s;
  for (int a = 0; a <= 2 * m + 1; ++a)
    if (!(a % 2 == 0 && a <= 2 * (q - 1))) s.push_back(a);
  return s;
}

inline std::vector<int> set_Nq(int m, int q)
{
  std::vector<int> s;
  for (int a = 0; a <= 2 * m + 1; ++a)
    if (!(a % 2 == 1 && a <= 2 * q - 1)) s.push_back(a);
  return s;
}

inline double ipow(double x, int k)
{
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= x;
  return v;
}

// Interpolation row: scaled derivative (alpha, beta) of the node polynomial evaluated at offset o.
inline Eigen::RowVectorXd interp_row(int m, Vec2 o, int alpha, int beta)
{
  const int d = 2 * m + 1;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero((d + 1) * (d + 1));
  for (int l2 = beta; l2 <= d; ++l2)
    for (int l1 = alpha; l1 <= d; ++l1)
      row(flat(l1, l2, d)) = binomial(l1, alpha) * binomial(l2, beta) * ipow(o[0], l1 - alpha) * ipow(o[1], l2 - beta);
  return row;
}

inline Vec2 inward(const FaceBc& f) { return {f.side == 0 ? 0.5 : -0.5, 0.0}; }

inline void finalize(CbcSystem& sys)
{
  const auto n = sys.raw.rows();
  if (sys.raw.cols() != n) {
    std::ostringstream msg;
    msg << "CBC system " << sys.label << " is not square (" << n << " x " << sys.raw.cols() << ")";
    throw std::logic_error(msg.str());
  }
  sys.row_scale.resize(n);
  sys.M = sys.raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = sys.raw.row(i).cwiseAbs().maxCoeff();
    sys.row_scale(i) = s > 0.0 ? s : 1.0;
    sys.M.row(i) /= sys.row_scale(i);
  }
  sys.lu.compute(sys.M);
}

// Tangential unit index for a face: r-faces vary along s, s-faces along r.
inline int tangential_index(const FaceBc& f, int alpha, int d)
{
  return f.axis == Axis::r ? flat(0, alpha, d) : flat(alpha, 0, d);
}

inline double tangential_spacing(const FaceBc& f, double hr, double hs) { return f.axis == Axis::r ? hs : hr; }

// z^T = (alpha!/h_t^alpha) e^T [N] L^q for every q = 0..m, one row each.
inline std::vector<Eigen::RowVectorXd> cbc_rows(const CbcOperators& ops, const FaceBc& f, int m, int alpha)
{
  const int d = 2 * m + 1;
  const int n = (d + 1) * (d + 1);
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(n);
  z(tangential_index(f, alpha, d)) = 1.0;
  if (f.type == Bc::neumann) z = (z * ops.N[static_cast<std::size_t>(f.axis)]).eval();
  const double k = factorial(alpha) / ipow(tangential_spacing(f, ops.hr, ops.hs), alpha);
  std::vector<Eigen::RowVectorXd> out;
  out.reserve(static_cast<std::size_t>(m + 1));
  for (int q = 0; q <= m; ++q) {
    if (q > 0) z = (z * ops.L).eval();
    out.push_back(k * z);
  }
  return out;
}

inline std::string face_label(const FaceBc& f)
{
  std::ostringstream s;
  s << (f.axis == Axis::r ? "r" : "s") << "=" << f.side << ":" << to_string(f.type);
  return s.str();
}

}  // namespace detail

/// Face system for a node on the face f (not a corner).
inline CbcSystem assemble_face(const CbcOperators& ops, const FaceBc& f, int m)
{
  if (f.type == Bc::periodic) throw std::invalid_argument("assemble_face: periodic faces carry no CBCs");
  const int d = 2 * m + 1;
  const int n = (d + 1) * (d + 1);
  CbcSystem sys;
  sys.m = m;
  sys.hr = ops.hr;
  sys.hs = ops.hs;
  sys.faces = {f};
  sys.label = detail::face_label(f);
  const double in = f.side == 0 ? 0.5 : -0.5;
  for (double t : {-0.5, 0.5}) sys.neighbor_offsets.push_back(f.axis == Axis::r ? Vec2{in, t} : Vec2{t, in});
  sys.raw.resize(n, n);
  int row = 0;
  for (int nb = 0; nb < 2; ++nb)
    for (int b = 0; b <= m; ++b)
      for (int a = 0; a <= m; ++a) {
        sys.raw.row(row++) = detail::interp_row(m, sys.neighbor_offsets[static_cast<std::size_t>(nb)], a, b);
        sys.rows.push_back({RowKind::interp, nb, a, b, 0, 0});
      }
  for (int a = 0; a <= d; ++a) {
    const auto z = detail::cbc_rows(ops, f, m, a);
    for (int q = 0; q <= m; ++q) {
      sys.raw.row(row++) = z[static_cast<std::size_t>(q)];
      sys.rows.push_back({RowKind::cbc, 0, a, 0, q, 0});
    }
  }
  detail::finalize(sys);
  return sys;
}

/// Corner system; fr is the r = const face, fs the s = const face.
inline CbcSystem assemble_corner(const CbcOperators& ops, const FaceBc& fr, const FaceBc& fs, int m,
                                 DnAverage dn = DnAverage::n2q_d2q1)
{
  if (fr.axis != Axis::r || fs.axis != Axis::s) throw std::invalid_argument("assemble_corner: need an r-face and an s-face");
  if (fr.type == Bc::periodic || fs.type == Bc::periodic)
    throw std::invalid_argument("assemble_corner: periodic faces have no corners");
  const int d = 2 * m + 1;
  const int n = (d + 1) * (d + 1);
  CbcSystem sys;
  sys.m = m;
  sys.hr = ops.hr;
  sys.hs = ops.hs;
  sys.faces = {fs, fr};  // face 0: tangential r; face 1: tangential s
  sys.label = detail::face_label(fr) + "," + detail::face_label(fs);
  sys.neighbor_offsets = {Vec2{fr.side == 0 ? 0.5 : -0.5, fs.side == 0 ? 0.5 : -0.5}};
  sys.raw.resize(n, n);
  int row = 0;
  for (int b = 0; b <= m; ++b)
    for (int a = 0; a <= m; ++a) {
      sys.raw.row(row++) = detail::interp_row(m, sys.neighbor_offsets[0], a, b);
      sys.rows.push_back({RowKind::interp, 0, a, b, 0, 0});
    }

  const bool dd = fr.type == Bc::dirichlet && fs.type == Bc::dirichlet;
  const bool nn = fr.type == Bc::neumann && fs.type == Bc::neumann;
  std::array<std::vector<std::vector<Eigen::RowVectorXd>>, 2> z;  // z[face][alpha][q]
  for (int k = 0; k < 2; ++k)
    for (int a = 0; a <= d; ++a) z[static_cast<std::size_t>(k)].push_back(detail::cbc_rows(ops, sys.faces[static_cast<std::size_t>(k)], m, a));

  for (int q = 0; q <= m; ++q) {
    std::array<std::vector<int>, 2> sets;
    std::array<int, 2> avg{};
    for (int k = 0; k < 2; ++k) {
      const FaceBc& f = sys.faces[static_cast<std::size_t>(k)];
      const bool use_M = dd || (!nn && f.type == Bc::neumann);
      sets[static_cast<std::size_t>(k)] = use_M ? detail::set_Mq(m, q) : detail::set_Nq(m, q);
      if (dd)
        avg[static_cast<std::size_t>(k)] = 2 * q;
      else if (nn)
        avg[static_cast<std::size_t>(k)] = 2 * q + 1;
      else if (f.type == Bc::neumann)
        avg[static_cast<std::size_t>(k)] = dn == DnAverage::n2q_d2q1 ? 2 * q : 2 * q + 1;
      else
        avg[static_cast<std::size_t>(k)] = dn == DnAverage::n2q_d2q1 ? 2 * q + 1 : 2 * q;
    }
    for (int k = 0; k < 2; ++k)
      for (int a : sets[static_cast<std::size_t>(k)]) {
        if (a == avg[static_cast<std::size_t>(k)]) continue;
        if (row >= n) throw std::logic_error("assemble_corner: too many rows");
        sys.raw.row(row++) = z[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)][static_cast<std::size_t>(q)];
        sys.rows.push_back({RowKind::cbc, 0, a, 0, q, k});
      }
    if (row >= n) throw std::logic_error("assemble_corner: too many rows");
    sys.raw.row(row++) = 0.5 * (z[0][static_cast<std::size_t>(avg[0])][static_cast<std::size_t>(q)] +
                                z[1][static_cast<std::size_t>(avg[1])][static_cast<std::size_t>(q)]);
    sys.rows.push_back({RowKind::averaged, 0, avg[0], avg[1], q, 0});
  }
  if (row != n) {
    std::ostringstream msg;
    msg << "assemble_corner: " << row << " rows for " << n << " unknowns";
    throw std::logic_error(msg.str());
  }
  detail::finalize(sys);
  return sys;
}

/// Operators for a Cartesian grid with spacings (hx, hy) and wave speed c.
inline CbcOperators cartesian_operators(int m, double hx, double hy, double c)
{
  const int d = 2 * m + 1;
  CbcOperators ops;
  ops.hr = hx;
  ops.hs = hy;
  ops.L = operator_matrix_cartesian(c, d, hx, hy);
  ops.N[0] = operator_matrix_of(d, hx, hy, [](const TaylorCoeffs2D& u) { return diff_scaled(u, Axis::r, 1).truncated(u.d1, u.d2); });
  ops.N[1] = operator_matrix_of(d, hx, hy, [](const TaylorCoeffs2D& u) { return diff_scaled(u, Axis::s, 1).truncated(u.d1, u.d2); });
  return ops;
}

/// Operators from fitted metrics at a boundary node (degree 2m+1 matrices).
inline CbcOperators curvilinear_operators(const MetricSet& ms, int m, std::span<const FaceBc> faces)
{
  const int d = 2 * m + 1;
  CbcOperators ops;
  ops.hr = ms.a20.hr;
  ops.hs = ms.a20.hs;
  ops.L = operator_matrix(ms, OperatorKind::L, d);
  for (const FaceBc& f : faces) {
    if (f.type != Bc::neumann) continue;
    const double sigma = f.side == 0 ? -1.0 : 1.0;
    ops.N[static_cast<std::size_t>(f.axis)] = sigma * operator_matrix(ms, OperatorKind::N, d, f.axis);
  }
  return ops;
}

/// Closed-form Cartesian CBC row d_tan^alpha d_n^nu (c^2 Lap)^q in derivative form:
/// (c^2 Lap)^q = c^2q sum_k C(q,k) D_x^{2(q-k)} D_y^{2k}.
inline Eigen::RowVectorXd cartesian_cbc_row(int m, const FaceBc& f, int alpha, int q, double hx, double hy, double c)
{
  const int d = 2 * m + 1;
  const int nu = f.type == Bc::neumann ? 1 : 0;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero((d + 1) * (d + 1));
  for (int k = 0; k <= q; ++k) {
    int ex = 2 * (q - k), ey = 2 * k;
    if (f.axis == Axis::r) {
      ex += nu;
      ey += alpha;
    } else {
      ex += alpha;
      ey += nu;
    }
    if (ex > d || ey > d) continue;
    row(detail::flat(ex, ey, d)) +=
        std::pow(c, 2 * q) * binomial(q, k) * factorial(ex) / detail::ipow(hx, ex) * factorial(ey) / detail::ipow(hy, ey);
  }
  return row;
}

/// Cartesian closed-form assembly (the explicit binomial formulas), for cross-checking.
inline CbcSystem assemble_cartesian_closed(int m, std::span<const FaceBc> faces, double hx, double hy, double c,
                                           DnAverage dn = DnAverage::n2q_d2q1)
{
  if (faces.empty() || faces.size() > 2) throw std::invalid_argument("assemble_cartesian_closed: one or two faces");
  const auto ops = cartesian_operators(m, hx, hy, c);
  CbcSystem sys;
  if (faces.size() == 1) {
    sys = assemble_face(ops, faces[0], m);
  } else {
    const FaceBc& fr = faces[0].axis == Axis::r ? faces[0] : faces[1];
    const FaceBc& fs = faces[0].axis == Axis::r ? faces[1] : faces[0];
    sys = assemble_corner(ops, fr, fs, m, dn);
  }
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    const RowTag& t = sys.rows[i];
    if (t.kind == RowKind::cbc)
      sys.raw.row(static_cast<Eigen::Index>(i)) =
          cartesian_cbc_row(m, sys.faces[static_cast<std::size_t>(t.face)], t.alpha, t.q, hx, hy, c);
    else if (t.kind == RowKind::averaged)
      sys.raw.row(static_cast<Eigen::Index>(i)) =
          0.5 * (cartesian_cbc_row(m, sys.faces[0], t.alpha, t.q, hx, hy, c) +
                 cartesian_cbc_row(m, sys.faces[1], t.beta, t.q, hx, hy, c));
  }
  sys.label += " closed";
  detail::finalize(sys);
  return sys;
}

/// Boundary data accessor: d_tan^alpha d_t^(2q) g on face index k of the system
/// (derivative with respect to the tangential parameter; Neumann in coordinate orientation).
using BoundaryData = std::function<double(int face, int q, int alpha)>;

/// Right-hand side in derivative form (before row scaling).
inline Eigen::VectorXd build_rhs(const CbcSystem& sys, std::span<const TaylorCoeffs2D* const> neighbors,
                                 const BoundaryData& data)
{
  Eigen::VectorXd b(sys.size());
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    const RowTag& t = sys.rows[i];
    double v = 0.0;
    switch (t.kind) {
      case RowKind::interp: v = neighbors[static_cast<std::size_t>(t.nb)]->at_or_zero(t.alpha, t.beta); break;
      case RowKind::cbc: v = data ? data(t.face, t.q, t.alpha) : 0.0; break;
      case RowKind::averaged: v = data ? 0.5 * (data(0, t.q, t.alpha) + data(1, t.q, t.beta)) : 0.0; break;
    }
    b(static_cast<Eigen::Index>(i)) = v;
  }
  return b;
}

inline void check_pivots(const CbcSystem& sys, const std::string& where)
{
  const auto& LU = sys.lu.matrixLU();
  for (Eigen::Index i = 0; i < LU.rows(); ++i)
    if (!(std::abs(LU(i, i)) >= 1e-14)) {
      std::ostringstream msg;
      msg << "singular CBC system (" << sys.label << ") at " << where << ": pivot " << i << " = " << LU(i, i);
      throw SingularSystem(msg.str());
    }
}

/// Solve the row-scaled system; returns the node polynomial (degree 2m+1) anchored at `center`.
inline TaylorCoeffs2D solve_boundary(const CbcSystem& sys, const Eigen::VectorXd& rhs, Vec2 center)
{
  Eigen::VectorXd b = rhs.cwiseQuotient(sys.row_scale);
  Eigen::VectorXd x = sys.lu.solve(b);
  const int d = 2 * sys.m + 1;
  TaylorCoeffs2D out(d, d, center[0], center[1], sys.hr, sys.hs);
  for (Eigen::Index k = 0; k < x.size(); ++k) out.c[static_cast<std::size_t>(k)] = x(k);
  return out;
}

/// Relative residual ||M x - b||_inf / ||b||_inf for the row-scaled system.
inline double residual(const CbcSystem& sys, const Eigen::VectorXd& rhs, const TaylorCoeffs2D& sol)
{
  Eigen::Map<const Eigen::VectorXd> x(sol.c.data(), static_cast<Eigen::Index>(sol.c.size()));
  Eigen::VectorXd b = rhs.cwiseQuotient(sys.row_scale);
  const double nb = b.cwiseAbs().maxCoeff();
  return (sys.M * x - b).cwiseAbs().maxCoeff() / (nb > 0 ? nb : 1.0);
}

enum class Scaling { rowscale, equilibrate };

inline std::string to_string(Scaling s) { return s == Scaling::rowscale ? "rowscale" : "equilibrate"; }

inline double kappa_inf(const Eigen::MatrixXd& A)
{
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd inv = lu.inverse();
  return A.cwiseAbs().rowwise().sum().maxCoeff() * inv.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Alternating row/column max-norm scaling (Ruiz) applied to the raw matrix.
inline Eigen::MatrixXd equilibrate(const Eigen::MatrixXd& A, int iters = 50)
{
  Eigen::MatrixXd B = A;
  for (int it = 0; it < iters; ++it) {
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
      const double s = B.row(i).cwiseAbs().maxCoeff();
      if (s > 0) B.row(i) /= std::sqrt(s);
    }
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      const double s = B.col(j).cwiseAbs().maxCoeff();
      if (s > 0) B.col(j) /= std::sqrt(s);
    }
  }
  return B;
}

inline double condition_number_inf(const CbcSystem& sys, Scaling s = Scaling::rowscale)
{
  return kappa_inf(s == Scaling::rowscale ? sys.M : equilibrate(sys.raw));
}

/// Cartesian system for a face or corner type at tall-cell ratio gamma = hx/hy.
inline CbcSystem cartesian_system(int m, Bc a, std::optional<Bc> b, double gamma, double hy = 0.1, double c = 1.0,
                                  DnAverage dn = DnAverage::n2q_d2q1)
{
  const double hx = gamma * hy;
  const auto ops = cartesian_operators(m, hx, hy, c);
  const FaceBc left{Axis::r, 0, a};
  if (!b) return assemble_face(ops, left, m);
  // a: left face, b: bottom face.
  return assemble_corner(ops, left, FaceBc{Axis::s, 0, *b}, m, dn);
}

/// Cartesian system with gamma-independent row scaling: each CBC row is made
/// dimensionless by h_t^alpha h_n^(2q+nu) and then divided by the constant that
/// normalizes its largest entry at gamma = 1. Interpolation rows are unchanged.
inline Eigen::MatrixXd cartesian_fixed_scaled(int m, Bc a, std::optional<Bc> b, double gamma,
                                              DnAverage dn = DnAverage::n2q_d2q1)
{
  const CbcSystem sys = cartesian_system(m, a, b, gamma, 1.0, 1.0, dn);
  auto dimensionless = [&](const FaceBc& f, int alpha, int q, double hx) {
    const double ht = f.axis == Axis::r ? 1.0 : hx, hn = f.axis == Axis::r ? hx : 1.0;
    const int nu = f.type == Bc::neumann ? 1 : 0;
    return Eigen::RowVectorXd(cartesian_cbc_row(m, f, alpha, q, hx, 1.0, 1.0) * detail::ipow(ht, alpha) *
                              detail::ipow(hn, 2 * q + nu));
  };
  Eigen::MatrixXd M = sys.M;
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    const RowTag& t = sys.rows[i];
    if (t.kind == RowKind::interp) continue;
    auto make = [&](double hx) {
      if (t.kind == RowKind::cbc) return dimensionless(sys.faces[static_cast<std::size_t>(t.face)], t.alpha, t.q, hx);
      return Eigen::RowVectorXd(0.5 * (dimensionless(sys.faces[0], t.alpha, t.q, hx) +
                                       dimensionless(sys.faces[1], t.beta, t.q, hx)));
    };
    M.row(static_cast<Eigen::Index>(i)) = make(gamma) / make(1.0).cwiseAbs().maxCoeff();
  }
  return M;
}

struct DetProbe {
  double xi = 0.0;
  double min_singular_value = 0.0;
  double det_ratio = 0.0;  // det M(xi) / det M(0) for the unscaled matrix
};

/// Left-face system for the frozen-coefficient operator
/// c20 D_rr + 2 c11 D_rs + c02 D_ss + c10 D_r + c01 D_s, with d/dn = -D_r.
inline DetProbe det_probe(int m, Bc bc, double c20, double c02, double c11, double c10, double c01, double dr, double ds)
{
  auto build = [&](double a10) {
    const int d = 2 * m + 1;
    MetricSet ms = constant_metrics(d, {0.0, 0.5}, {dr, ds}, c20, 2.0 * c11, c02, a10, c01);
    const FaceBc f{Axis::r, 0, bc};
    return assemble_face(curvilinear_operators(ms, m, {&f, 1}), f, m);
  };
  const CbcSystem sys = build(c10);
  DetProbe out;
  out.xi = c10 * dr / (2.0 * c20);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.M);
  out.min_singular_value = svd.singularValues().minCoeff();
  const CbcSystem ref = build(0.0);
  // Ratio of raw determinants through logs of the row-scaled factors.
  auto log_det = [](const CbcSystem& s, double& sign) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s.M);
    double acc = 0.0;
    sign = lu.permutationP().determinant() * lu.permutationQ().determinant();
    for (Eigen::Index i = 0; i < s.M.rows(); ++i) {
      const double u = lu.matrixLU()(i, i);
      if (u < 0) sign = -sign;
      acc += std::log(std::abs(u)) + std::log(s.row_scale(i));
    }
    return acc;
  };
  double sa = 1.0, sb = 1.0;
  const double la = log_det(sys, sa), lb = log_det(ref, sb);
  out.det_ratio = sa * sb * std::exp(la - lb);
  return out;
}

/// First xi in (0, xi_hi] where the minimum singular value has a local minimum that
/// reaches (numerically) zero, refined by golden-section search. Returns NaN when none.
inline double det_sweep(int m, Bc bc, double xi_hi = 6.0, int samples = 600)
{
  const double c20 = 1.0, dr = 0.1;
  auto sig = [&](double xi) { return det_probe(m, bc, c20, 1.0, 0.0, 2.0 * c20 * xi / dr, 0.0, dr, 0.1).min_singular_value; };
  std::vector<double> xs(static_cast<std::size_t>(samples + 1)), ys(xs.size());
  for (int k = 0; k <= samples; ++k) {
    xs[static_cast<std::size_t>(k)] = xi_hi * k / samples;
    ys[static_cast<std::size_t>(k)] = sig(xs[static_cast<std::size_t>(k)]);
  }
  const double scale = ys[0];
  for (int k = 1; k < samples; ++k) {
    const auto K = static_cast<std::size_t>(k);
    if (!(ys[K] <= ys[K - 1] && ys[K] <= ys[K + 1])) continue;
    double a = xs[K - 1], b = xs[K + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = sig(x1), f2 = sig(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = sig(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = sig(x2);
      }
    }
    const double xm = 0.5 * (a + b);
    // A genuine dip goes far below the xi = 0 level.
    if (sig(xm) < 1e-3 * scale) return xm;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Homogeneous Cartesian face solve at x = 0 with interior data sin(pi x) p(y) (Dirichlet)
/// or cos(pi x) p(y) (Neumann). Returns the largest forbidden-parity coefficient relative to max |u|.
inline double symmetry_check(int m, Bc bc, double h = 0.05)
{
  const auto ops = cartesian_operators(m, h, h, 1.0);
  const FaceBc f{Axis::r, 0, bc};
  const CbcSystem sys = assemble_face(ops, f, m);
  const double y0 = 0.5;
  auto u = [&](double x, double y) {
    const double p = 1.0 + 0.5 * y - 0.3 * y * y + 0.2 * y * y * y;
    return (bc == Bc::dirichlet ? std::sin(M_PI * x) : std::cos(M_PI * x)) * p;
  };
  std::vector<TaylorCoeffs2D> nb;
  for (const Vec2& o : sys.neighbor_offsets) {
    const double xc = o[0] * h, yc = y0 + o[1] * h;
    nb.push_back(fit_taylor_2d(2 * m + 1, {xc, yc}, {h, h}, u).truncated(m, m));
  }
  std::vector<const TaylorCoeffs2D*> ptr{&nb[0], &nb[1]};
  const Eigen::VectorXd rhs = build_rhs(sys, ptr, BoundaryData{});
  const TaylorCoeffs2D sol = solve_boundary(sys, rhs, {0.0, y0});
  const int forbidden = bc == Bc::dirichlet ? 0 : 1;
  double worst = 0.0;
  for (int l2 = 0; l2 <= sol.d2; ++l2)
    for (int l1 = forbidden; l1 <= sol.d1; l1 += 2) worst = std::max(worst, std::abs(sol(l1, l2)));
  const double norm = sol.max_abs();
  return norm > 0 ? worst / norm : 0.0;
}

}  // namespace hermite
