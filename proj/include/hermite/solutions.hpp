#pragma once

// Exact solutions of u_tt = c^2 (u_xx + u_yy): a traveling sine wave, Dirichlet
// eigenfunctions of the unit square and of an annulus, with derivatives for
// initial data, boundary data and error measurement.

#include "hermite/cbc.hpp"
#include "hermite/geometry.hpp"
#include "hermite/polyalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermite {

enum class SolutionKind { sine, square_eig, annulus_eig };

inline std::string to_string(SolutionKind k)
{
  switch (k) {
    case SolutionKind::sine: return "sine";
    case SolutionKind::square_eig: return "square_eig";
    case SolutionKind::annulus_eig: return "annulus_eig";
  }
  return "?";
}

/// d(lambda) = J_n(lambda ra) Y_n(lambda rb) - J_n(lambda rb) Y_n(lambda ra).
inline double annulus_cross_product(int n, double lambda, double ra, double rb)
{
  return std::cyl_bessel_j(n, lambda * ra) * std::cyl_neumann(n, lambda * rb) -
         std::cyl_bessel_j(n, lambda * rb) * std::cyl_neumann(n, lambda * ra);
}

/// The nr-th positive root of the cross product, by scan and bisection.
inline double annulus_eigenvalue(int ntheta, int nr, double ra, double rb)
{
  if (nr < 1) throw std::invalid_argument("annulus_eigenvalue: n_r must be >= 1");
  if (!(rb > ra && ra > 0)) throw std::invalid_argument("annulus_eigenvalue: need 0 < ra < rb");
  const double step = M_PI / (4.0 * (rb - ra));
  auto d = [&](double l) { return annulus_cross_product(ntheta, l, ra, rb); };
  int found = 0;
  double a = step, fa = d(a);
  for (int k = 0; k < 4000; ++k) {
    const double b = a + step, fb = d(b);
    if (fa == 0.0 || fa * fb < 0) {
      if (++found == nr) {
        double lo = a, hi = b, flo = fa;
        if (fa == 0.0) return a;
        while (hi - lo > 1e-13) {
          const double mid = 0.5 * (lo + hi), fm = d(mid);
          if (fm == 0.0) return mid;
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    a = b;
    fa = fb;
  }
  std::ostringstream msg;
  msg << "annulus_eigenvalue: bracket scan exhausted before root " << nr << " (n_theta=" << ntheta << ")";
  throw std::runtime_error(msg.str());
}

struct ExactSolution {
  SolutionKind kind = SolutionKind::sine;
  double kx = 1, ky = 1, c = 1;
  int ntheta = 1, nr = 1;
  double ra = 0.5, rb = 1.0;
  double omega = 0;  // temporal frequency
  double lambda = 0;
  double cJ = 0, cY = 0, amp = 1;

  static ExactSolution sine(double kx, double ky, double c = 1.0)
  {
    ExactSolution s;
    s.kind = SolutionKind::sine;
    s.kx = kx;
    s.ky = ky;
    s.c = c;
    s.omega = c * std::hypot(kx, ky);
    return s;
  }
  static ExactSolution square_eig(int kx, int ky, double c = 1.0)
  {
    ExactSolution s;
    s.kind = SolutionKind::square_eig;
    s.kx = kx;
    s.ky = ky;
    s.c = c;
    s.omega = c * M_PI * std::hypot(double(kx), double(ky));
    return s;
  }
  static ExactSolution annulus_eig(int ntheta, int nr, double ra = 0.5, double rb = 1.0, double c = 1.0)
  {
    ExactSolution s;
    s.kind = SolutionKind::annulus_eig;
    s.ntheta = ntheta;
    s.nr = nr;
    s.ra = ra;
    s.rb = rb;
    s.c = c;
    s.lambda = annulus_eigenvalue(ntheta, nr, ra, rb);
    s.omega = c * s.lambda;
    s.cJ = std::cyl_neumann(ntheta, s.lambda * ra);
    s.cY = -std::cyl_bessel_j(ntheta, s.lambda * ra);
    s.amp = 1.0 / std::hypot(s.cJ, s.cY);
    return s;
  }

  /// Largest spatial derivative order (each direction, or total for the annulus) supported.
  int max_space_order() const { return kind == SolutionKind::annulus_eig ? 2 : 64; }
};

namespace detail {

// k-th derivative of sin at a.
inline double dsin(double a, int k) { return std::sin(a + 0.5 * M_PI * (k % 4)); }
inline double dcos(double a, int k) { return std::cos(a + 0.5 * M_PI * (k % 4)); }

// Radial factor Z(rho) = cJ J_n(lambda rho) + cY Y_n(lambda rho) and its first two derivatives.
inline std::array<double, 3> annulus_radial(const ExactSolution& s, double rho)
{
  const int n = s.ntheta;
  const double z = s.lambda * rho;
  const double Z = s.cJ * std::cyl_bessel_j(n, z) + s.cY * std::cyl_neumann(n, z);
  const double Z1 = s.cJ * std::cyl_bessel_j(n + 1, z) + s.cY * std::cyl_neumann(n + 1, z);
  const double dZ = s.lambda * (n / z * Z - Z1);
  const double d2Z = -dZ / rho - (s.lambda * s.lambda - double(n) * n / (rho * rho)) * Z;
  return {Z, dZ, d2Z};
}

}  // namespace detail

/// d^ox/dx d^oy/dy d^ot/dt u at (x, y, t).
inline double eval_solution(const ExactSolution& s, double x, double y, double t, int ox = 0, int oy = 0, int ot = 0)
{
  if (ox < 0 || oy < 0 || ot < 0) throw std::invalid_argument("eval_solution: negative derivative order");
  switch (s.kind) {
    case SolutionKind::sine: {
      const double ph = s.kx * x + s.ky * y - s.omega * t;
      return std::pow(s.kx, ox) * std::pow(s.ky, oy) * std::pow(-s.omega, ot) * detail::dsin(ph, ox + oy + ot);
    }
    case SolutionKind::square_eig: {
      const double ax = M_PI * s.kx, ay = M_PI * s.ky;
      return std::pow(ax, ox) * detail::dsin(ax * x, ox) * std::pow(ay, oy) * detail::dsin(ay * y, oy) *
             std::pow(s.omega, ot) * detail::dcos(s.omega * t, ot);
    }
    case SolutionKind::annulus_eig: {
      if (ox + oy > 2) {
        std::ostringstream msg;
        msg << "eval_solution: annulus spatial derivative order " << ox + oy << " exceeds 2";
        throw std::domain_error(msg.str());
      }
      const double rho = std::hypot(x, y);
      if (!(rho > 0)) throw std::domain_error("eval_solution: annulus evaluated at the origin");
      const double th = std::atan2(y, x);
      const double n = s.ntheta;
      const auto R = detail::annulus_radial(s, rho);
      // f(rho, theta) = Z(rho) cos(n theta) and its polar partials.
      const double cn = std::cos(n * th), sn = std::sin(n * th);
      const double f = R[0] * cn, fr = R[1] * cn, frr = R[2] * cn;
      const double ft = -n * R[0] * sn, frt = -n * R[1] * sn, ftt = -n * n * R[0] * cn;
      const double co = x / rho, si = y / rho;
      double v = 0;
      if (ox == 0 && oy == 0)
        v = f;
      else if (ox == 1 && oy == 0)
        v = co * fr - si / rho * ft;
      else if (ox == 0 && oy == 1)
        v = si * fr + co / rho * ft;
      else {
        const double A = fr / rho + ftt / (rho * rho), B = frt / rho - ft / (rho * rho);
        if (ox == 2)
          v = co * co * frr + si * si * A - 2 * si * co * B;
        else if (oy == 2)
          v = si * si * frr + co * co * A + 2 * si * co * B;
        else
          v = si * co * (frr - A) + (co * co - si * si) * B;
      }
      return s.amp * v * std::pow(s.omega, ot) * detail::dcos(s.omega * t, ot);
    }
  }
  return 0.0;
}

/// Boundary quantity at physical point X: the trace (Dirichlet) or the coordinate-oriented
/// normal flux grad(r_face) . grad u / |grad r_face| (Neumann), differentiated ot times in t.
inline double boundary_value(const ExactSolution& s, const Mapping& g, const FaceBc& f, Vec2 rs, double t, int ot)
{
  const Vec2 X = map_eval(g, rs);
  if (f.type == Bc::dirichlet) return eval_solution(s, X[0], X[1], t, 0, 0, ot);
  const auto im = inverse_metrics(g, rs);
  const double gx = f.axis == Axis::r ? im[0] : im[2];
  const double gy = f.axis == Axis::r ? im[1] : im[3];
  const double ux = eval_solution(s, X[0], X[1], t, 1, 0, ot), uy = eval_solution(s, X[0], X[1], t, 0, 1, ot);
  return (gx * ux + gy * uy) / std::hypot(gx, gy);
}

/// Table of d_tan^alpha d_t^(2q + time_shift) g at boundary node rs on face f,
/// indexed [q * (2m+2) + alpha] for q = 0..m, alpha = 0..2m+1. The tangential
/// derivative is in the face parameter (s on r-faces, r on s-faces) with spacing h_t.
/// Identity maps use analytic derivatives; otherwise a degree-(2m+1) fit along the face.
inline std::vector<double> boundary_derivatives(const ExactSolution& s, const Mapping& g, const FaceBc& f, Vec2 rs,
                                                double h_t, int m, double t, int time_shift = 0)
{
  const int d = 2 * m + 1;
  std::vector<double> out(static_cast<std::size_t>((m + 1) * (d + 1)));
  const bool analytic = g.is_identity() && s.kind != SolutionKind::annulus_eig;
  for (int q = 0; q <= m; ++q) {
    const int ot = 2 * q + time_shift;
    if (analytic) {
      const int nx = f.type == Bc::neumann && f.axis == Axis::r ? 1 : 0;
      const int ny = f.type == Bc::neumann && f.axis == Axis::s ? 1 : 0;
      for (int a = 0; a <= d; ++a)
        out[static_cast<std::size_t>(q * (d + 1) + a)] =
            eval_solution(s, rs[0], rs[1], t, nx + (f.axis == Axis::s ? a : 0), ny + (f.axis == Axis::r ? a : 0), ot);
      continue;
    }
    const double tau0 = f.axis == Axis::r ? rs[1] : rs[0];
    const auto fit = fit_taylor(d, tau0, h_t, [&](double tau) {
      const Vec2 p = f.axis == Axis::r ? Vec2{rs[0], tau} : Vec2{tau, rs[1]};
      return boundary_value(s, g, f, p, t, ot);
    });
    for (int a = 0; a <= d; ++a) out[static_cast<std::size_t>(q * (d + 1) + a)] = fit[a] * factorial(a) / std::pow(h_t, a);
  }
  return out;
}

/// Single entry of boundary_derivatives.
inline double boundary_data(const ExactSolution& s, const Mapping& g, const FaceBc& f, int alpha, int q, Vec2 rs,
                            double h_t, int m, double t)
{
  return boundary_derivatives(s, g, f, rs, h_t, m, t)[static_cast<std::size_t>(q * (2 * m + 2) + alpha)];
}

}  // namespace hermite
