#pragma once

// Half-step Hermite evolution: the first-order-in-time (u, v) scheme, the
// second-order-in-time three-level scheme, the backward starting step for the
// latter, and Hermite smoothing.

#include "hermite/geometry.hpp"
#include "hermite/grid.hpp"
#include "hermite/operator.hpp"
#include "hermite/polyalg.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace hermite {

/// L at one node: fitted metrics, or the constant-coefficient Cartesian operator.
struct NodeOperator {
  const MetricSet* metrics = nullptr;  // null selects the Cartesian form
  double c = 1.0;

  TaylorCoeffs2D apply(const TaylorCoeffs2D& u, int out_degree = -1) const
  {
    return metrics ? apply_L(*metrics, u, out_degree) : apply_L_cartesian(c, u, out_degree);
  }
};

/// Time-Taylor coefficients u_{l1,l2,beta}, beta = 0..2m+2, of the first-order system.
struct SpaceTimeCoeffs {
  std::vector<TaylorCoeffs2D> u;  // degree 2m+1
  std::vector<TaylorCoeffs2D> v;  // degree 2m-1
  double dt = 0.0;
};

/// Recursion u_{beta+1} = dt/(beta+1) v_beta, v_{beta+1} = dt/(beta+1) (L u_beta), beta = 0..2m+1.
inline SpaceTimeCoeffs fot_series(const NodeOperator& op, const TaylorCoeffs2D& ubar, const TaylorCoeffs2D& vbar, double dt,
                                  int m)
{
  const int du = 2 * m + 1, dv = 2 * m - 1;
  if (ubar.d1 != du || ubar.d2 != du) throw std::invalid_argument("fot_series: u must have degree 2m+1");
  if (vbar.d1 != dv || vbar.d2 != dv) throw std::invalid_argument("fot_series: v must have degree 2m-1");
  SpaceTimeCoeffs st;
  st.dt = dt;
  st.u.push_back(ubar);
  st.v.push_back(vbar);
  for (int beta = 0; beta <= 2 * m + 1; ++beta) {
    const double k = dt / (beta + 1);
    st.u.push_back(k * st.v.back().truncated(du, du));
    st.v.push_back(k * op.apply(st.u[static_cast<std::size_t>(beta)], dv));
  }
  return st;
}

/// FOT half step: returns (u of degree m, v of degree m-1) at t + dt/2.
inline std::pair<TaylorCoeffs2D, TaylorCoeffs2D> evolve_fot(const NodeOperator& op, const TaylorCoeffs2D& ubar,
                                                            const TaylorCoeffs2D& vbar, double dt, int m)
{
  const SpaceTimeCoeffs st = fot_series(op, ubar, vbar, dt, m);
  TaylorCoeffs2D u = TaylorCoeffs2D::zeros_like(ubar, m, m);
  TaylorCoeffs2D v = TaylorCoeffs2D::zeros_like(ubar, m - 1, m - 1);
  double w = 1.0;
  for (std::size_t beta = 0; beta < st.u.size(); ++beta, w *= 0.5) {
    for (int l2 = 0; l2 <= m; ++l2)
      for (int l1 = 0; l1 <= m; ++l1) u(l1, l2) += w * st.u[beta](l1, l2);
    for (int l2 = 0; l2 < m; ++l2)
      for (int l1 = 0; l1 < m; ++l1) v(l1, l2) += w * st.v[beta](l1, l2);
  }
  return {u, v};
}

/// SOT half step: u = 2 ubar - u_prev + 2 sum_{mu=1..m} (dt/2)^(2mu)/(2mu)! L^mu ubar, degrees <= m.
inline TaylorCoeffs2D evolve_sot(const NodeOperator& op, const TaylorCoeffs2D& ubar, const TaylorCoeffs2D& u_prev, double dt,
                                 int m)
{
  TaylorCoeffs2D u = TaylorCoeffs2D::zeros_like(ubar, m, m);
  for (int l2 = 0; l2 <= m; ++l2)
    for (int l1 = 0; l1 <= m; ++l1) u(l1, l2) = 2.0 * ubar(l1, l2) - u_prev.at_or_zero(l1, l2);
  TaylorCoeffs2D w = ubar;
  const double half = 0.5 * dt;
  for (int mu = 1; mu <= m; ++mu) {
    // Degree m of L^m needs degree m + 2(m - mu) of L^mu.
    w = op.apply(w, std::min(w.d1, m + 2 * (m - mu)));
    const double k = 2.0 * std::pow(half, 2 * mu) / factorial(2 * mu);
    for (int l2 = 0; l2 <= m; ++l2)
      for (int l1 = 0; l1 <= m; ++l1) u(l1, l2) += k * w.at_or_zero(l1, l2);
  }
  return u;
}

/// Backward Taylor step to t = -dt/2 from co-centered interpolants of U0 and U1 (degree 2m+1).
inline TaylorCoeffs2D first_step_node(const NodeOperator& op, const TaylorCoeffs2D& ubar, const TaylorCoeffs2D& vbar,
                                      double dt, int m)
{
  const double delta = -0.5 * dt;
  TaylorCoeffs2D u = TaylorCoeffs2D::zeros_like(ubar, m, m);
  for (int l2 = 0; l2 <= m; ++l2)
    for (int l1 = 0; l1 <= m; ++l1) u(l1, l2) = ubar(l1, l2) + delta * vbar.at_or_zero(l1, l2);
  TaylorCoeffs2D wu = ubar, wv = vbar;
  for (int k = 1; k <= m; ++k) {
    wu = op.apply(wu);
    wv = op.apply(wv);
    const double a = std::pow(delta, 2 * k) / factorial(2 * k);
    const double b = std::pow(delta, 2 * k + 1) / factorial(2 * k + 1);
    for (int l2 = 0; l2 <= m; ++l2)
      for (int l1 = 0; l1 <= m; ++l1) u(l1, l2) += a * wu.at_or_zero(l1, l2) + b * wv.at_or_zero(l1, l2);
  }
  return u;
}

/// Apply a per-node map over every node of a field, in parallel.
template <class F>
void for_each_node(HermiteField& f, F&& fn)
{
#pragma omp parallel for schedule(static)
  for (int j = 0; j < f.n2; ++j)
    for (int i = 0; i < f.n1; ++i) fn(i, j, f.at(i, j));
}

/// Writes boundary primal polynomials (degree 2m+1) into `primal_bar` from the dual field.
using BoundaryClosure = std::function<void(const HermiteField& dual, HermiteField& primal_bar)>;

/// Ns passes of primal -> dual -> (boundary closure) -> primal. Ns = 0 returns the input.
inline HermiteField smooth(const HermiteField& primal, int m, int Ns, const BoundaryClosure& closure)
{
  if (Ns < 0) throw std::invalid_argument("smooth: Ns must be >= 0");
  HermiteField u = primal;
  for (int k = 0; k < Ns; ++k) {
    const HermiteField dual = truncate_field(hermite_interp_2d(u, m), m);
    HermiteField pbar = hermite_interp_2d(dual, m);
    if (closure) closure(dual, pbar);
    u = truncate_field(pbar, m);
  }
  return u;
}

}  // namespace hermite
