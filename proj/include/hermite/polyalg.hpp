#pragma once

// Scaled Taylor polynomials in one and two variables.
//
// A coefficient u_{l1,l2} multiplies R^l1 S^l2 with R = (r - r0)/hr and
// S = (s - s0)/hs, so u_{l1,l2} approximates hr^l1 hs^l2 / (l1! l2!) times the
// corresponding partial derivative at the center. Two-dimensional arrays are
// stored l1-fastest: index = l1 + (d1 + 1) * l2.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hermite {

enum class Axis { r = 0, s = 1 };

inline double factorial(int n)
{
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  if (n < 0 || n >= static_cast<int>(table.size())) throw std::out_of_range("factorial: argument out of range");
  return table[static_cast<std::size_t>(n)];
}

inline double binomial(int n, int k)
{
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(b);
}

/// Degree-d polynomial in the scaled variable (x - center)/spacing.
struct TaylorCoeffs1D {
  std::vector<double> coeffs;
  double center = 0.0;
  double spacing = 1.0;

  TaylorCoeffs1D() : coeffs(1, 0.0) {}
  TaylorCoeffs1D(int degree, double center_, double spacing_)
      : coeffs(static_cast<std::size_t>(degree + 1), 0.0), center(center_), spacing(spacing_)
  {
    if (degree < 0) throw std::invalid_argument("TaylorCoeffs1D: negative degree");
    if (!(spacing_ > 0.0)) throw std::invalid_argument("TaylorCoeffs1D: spacing must be positive");
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double& operator[](int l) { return coeffs[static_cast<std::size_t>(l)]; }
  double operator[](int l) const { return coeffs[static_cast<std::size_t>(l)]; }
};

/// Dense (d1+1) x (d2+1) scaled Taylor coefficients anchored at (r0, s0).
struct TaylorCoeffs2D {
  int d1 = 0;
  int d2 = 0;
  double r0 = 0.0;
  double s0 = 0.0;
  double hr = 1.0;
  double hs = 1.0;
  std::vector<double> c;

  TaylorCoeffs2D() : c(1, 0.0) {}
  TaylorCoeffs2D(int deg1, int deg2, double r0_, double s0_, double hr_, double hs_)
      : d1(deg1), d2(deg2), r0(r0_), s0(s0_), hr(hr_), hs(hs_),
        c(static_cast<std::size_t>((deg1 + 1) * (deg2 + 1)), 0.0)
  {
    if (deg1 < 0 || deg2 < 0) throw std::invalid_argument("TaylorCoeffs2D: negative degree");
    if (!(hr_ > 0.0) || !(hs_ > 0.0)) throw std::invalid_argument("TaylorCoeffs2D: spacings must be positive");
  }

  /// Zero polynomial with the same anchor as `like` and degrees (deg1, deg2).
  static TaylorCoeffs2D zeros_like(const TaylorCoeffs2D& like, int deg1, int deg2)
  {
    return TaylorCoeffs2D(deg1, deg2, like.r0, like.s0, like.hr, like.hs);
  }

  int stride() const { return d1 + 1; }
  std::size_t size() const { return c.size(); }
  double& operator()(int l1, int l2) { return c[static_cast<std::size_t>(l1 + (d1 + 1) * l2)]; }
  double operator()(int l1, int l2) const { return c[static_cast<std::size_t>(l1 + (d1 + 1) * l2)]; }

  /// Coefficient or zero when (l1, l2) lies outside the stored range.
  double at_or_zero(int l1, int l2) const
  {
    if (l1 < 0 || l2 < 0 || l1 > d1 || l2 > d2) return 0.0;
    return (*this)(l1, l2);
  }

  bool same_anchor(const TaylorCoeffs2D& o) const
  {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a) + std::abs(b)); };
    return close(r0, o.r0) && close(s0, o.s0) && close(hr, o.hr) && close(hs, o.hs);
  }

  double max_abs() const
  {
    double v = 0.0;
    for (double x : c) v = std::max(v, std::abs(x));
    return v;
  }

  /// Copy restricted (or zero-padded) to new degrees.
  TaylorCoeffs2D truncated(int deg1, int deg2) const
  {
    TaylorCoeffs2D out = zeros_like(*this, deg1, deg2);
    for (int l2 = 0; l2 <= std::min(d2, deg2); ++l2)
      for (int l1 = 0; l1 <= std::min(d1, deg1); ++l1) out(l1, l2) = (*this)(l1, l2);
    return out;
  }
};

inline double eval(const TaylorCoeffs1D& p, double x)
{
  const double z = (x - p.center) / p.spacing;
  double v = 0.0;
  for (int l = p.degree(); l >= 0; --l) v = v * z + p[l];
  return v;
}

inline double eval(const TaylorCoeffs2D& p, double r, double s)
{
  const double R = (r - p.r0) / p.hr;
  const double S = (s - p.s0) / p.hs;
  double outer = 0.0;
  for (int l2 = p.d2; l2 >= 0; --l2) {
    double inner = 0.0;
    for (int l1 = p.d1; l1 >= 0; --l1) inner = inner * R + p(l1, l2);
    outer = outer * S + inner;
  }
  return outer;
}

namespace detail {

// w_{l1,l2} += sum_k a_{k1,k2} b_{l1-k1,l2-k2} for l1 <= wd1, l2 <= wd2.
inline void accumulate_product(std::span<const double> a, int ad1, int ad2, std::span<const double> b, int bd1,
                               int bd2, std::span<double> w, int wd1, int wd2)
{
  const int as = ad1 + 1;
  const int bs = bd1 + 1;
  const int ws = wd1 + 1;
  for (int k2 = 0; k2 <= std::min(ad2, wd2); ++k2) {
    for (int k1 = 0; k1 <= std::min(ad1, wd1); ++k1) {
      const double ak = a[static_cast<std::size_t>(k1 + as * k2)];
      if (ak == 0.0) continue;
      const int l2max = std::min(wd2, k2 + bd2);
      const int l1max = std::min(wd1, k1 + bd1);
      for (int l2 = k2; l2 <= l2max; ++l2) {
        const double* brow = b.data() + bs * (l2 - k2) - k1;
        double* wrow = w.data() + ws * l2;
        for (int l1 = k1; l1 <= l1max; ++l1) wrow[l1] += ak * brow[l1];
      }
    }
  }
}

}  // namespace detail

/// Truncated product: coefficients of p*q with degrees capped at dmax.
inline TaylorCoeffs2D mul_trunc(const TaylorCoeffs2D& p, const TaylorCoeffs2D& q, std::pair<int, int> dmax)
{
  if (!p.same_anchor(q)) throw std::invalid_argument("mul_trunc: operands have different centers or spacings");
  const int d1 = std::min(dmax.first, p.d1 + q.d1);
  const int d2 = std::min(dmax.second, p.d2 + q.d2);
  TaylorCoeffs2D out = TaylorCoeffs2D::zeros_like(p, d1, d2);
  detail::accumulate_product(p.c, p.d1, p.d2, q.c, q.d1, q.d2, out.c, d1, d2);
  return out;
}

inline TaylorCoeffs2D operator+(const TaylorCoeffs2D& a, const TaylorCoeffs2D& b)
{
  if (!a.same_anchor(b)) throw std::invalid_argument("operator+: operands have different centers or spacings");
  TaylorCoeffs2D out = TaylorCoeffs2D::zeros_like(a, std::max(a.d1, b.d1), std::max(a.d2, b.d2));
  for (int l2 = 0; l2 <= out.d2; ++l2)
    for (int l1 = 0; l1 <= out.d1; ++l1) out(l1, l2) = a.at_or_zero(l1, l2) + b.at_or_zero(l1, l2);
  return out;
}

inline TaylorCoeffs2D operator*(double k, TaylorCoeffs2D p)
{
  for (double& x : p.c) x *= k;
  return p;
}

/// Scaled coefficients of d^order p / d(axis)^order, in the same scaled variables.
inline TaylorCoeffs2D diff_scaled(const TaylorCoeffs2D& p, Axis axis, int order)
{
  if (order < 0) throw std::invalid_argument("diff_scaled: negative order");
  if (order == 0) return p;
  const bool along_r = axis == Axis::r;
  const int dn = (along_r ? p.d1 : p.d2) - order;
  if (dn < 0) return TaylorCoeffs2D::zeros_like(p, along_r ? 0 : p.d1, along_r ? p.d2 : 0);
  const double h = along_r ? p.hr : p.hs;
  const double hpow = std::pow(h, order);
  TaylorCoeffs2D out = TaylorCoeffs2D::zeros_like(p, along_r ? dn : p.d1, along_r ? p.d2 : dn);
  for (int l2 = 0; l2 <= out.d2; ++l2) {
    for (int l1 = 0; l1 <= out.d1; ++l1) {
      const int l = along_r ? l1 : l2;
      const double f = factorial(l + order) / (factorial(l) * hpow);
      out(l1, l2) = (along_r ? p(l1 + order, l2) : p(l1, l2 + order)) * f;
    }
  }
  return out;
}

/// q+1 Chebyshev points z_j = -cos(pi j / q)/2 on [-1/2, 1/2].
inline std::vector<double> chebyshev_points(int q)
{
  if (q < 0) throw std::invalid_argument("chebyshev_points: negative degree");
  std::vector<double> z(static_cast<std::size_t>(q + 1), 0.0);
  if (q == 0) return z;
  const double pi = std::acos(-1.0);
  for (int j = 0; j <= q; ++j) z[static_cast<std::size_t>(j)] = -0.5 * std::cos(pi * j / q);
  return z;
}

/// Dual Vandermonde solve: on entry f holds samples at z, on exit the
/// power-series coefficients of the interpolant in z.
inline void newton_to_taylor(std::span<const double> z, std::span<double> f)
{
  const int q = static_cast<int>(f.size()) - 1;
  for (int k = 1; k <= q; ++k)
    for (int j = q; j >= k; --j) f[j] = (f[j] - f[j - 1]) / (z[j] - z[j - k]);
  for (int k = q - 1; k >= 0; --k)
    for (int j = k; j <= q - 1; ++j) f[j] = f[j] - z[k] * f[j + 1];
}

/// Scaled Taylor coefficients (degree q) of f on the cell [center - spacing/2, center + spacing/2].
template <class F>
TaylorCoeffs1D fit_taylor(int q, double center, double spacing, F&& f)
{
  TaylorCoeffs1D out(q, center, spacing);
  const auto z = chebyshev_points(q);
  for (int j = 0; j <= q; ++j) {
    const double x = center + spacing * z[static_cast<std::size_t>(j)];
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "fit_taylor: non-finite sample at x = " << x;
      throw std::domain_error(msg.str());
    }
    out[j] = v;
  }
  // q = 0 is the direct sample at the center.
  newton_to_taylor(z, out.coeffs);
  return out;
}

/// Tensor-product fit from samples on the Chebyshev grid, samples[i + (q+1) j] at
/// (r0 + hr z_i, s0 + hs z_j).
inline TaylorCoeffs2D fit_taylor_2d_samples(int q, std::pair<double, double> center,
                                            std::pair<double, double> spacings, std::span<const double> samples)
{
  TaylorCoeffs2D out(q, q, center.first, center.second, spacings.first, spacings.second);
  const auto n = static_cast<std::size_t>(q + 1);
  if (samples.size() != n * n) throw std::invalid_argument("fit_taylor_2d_samples: wrong sample count");
  const auto z = chebyshev_points(q);
  std::vector<double> line(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) line[i] = samples[i + n * j];
    newton_to_taylor(z, line);
    for (std::size_t i = 0; i < n; ++i) out.c[i + n * j] = line[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) line[j] = out.c[i + n * j];
    newton_to_taylor(z, line);
    for (std::size_t j = 0; j < n; ++j) out.c[i + n * j] = line[j];
  }
  return out;
}

/// Tensor-product fit: degree q in each variable, exact for polynomials of that degree.
template <class F>
TaylorCoeffs2D fit_taylor_2d(int q, std::pair<double, double> center, std::pair<double, double> spacings, F&& f)
{
  const auto [r0, s0] = center;
  const auto [hr, hs] = spacings;
  const auto z = chebyshev_points(q);
  const auto n = static_cast<std::size_t>(q + 1);
  std::vector<double> samples(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = s0 + hs * z[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double r = r0 + hr * z[i];
      const double v = f(r, s);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "fit_taylor_2d: non-finite sample at (" << r << ", " << s << ")";
        throw std::domain_error(msg.str());
      }
      samples[i + n * j] = v;
    }
  }
  return fit_taylor_2d_samples(q, center, spacings, samples);
}

}  // namespace hermite
