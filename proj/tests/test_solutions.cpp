#include "hermite/solutions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hermite;

namespace {

// mpmath, 40 digits.
struct BesselRef {
  int n;
  double x, j, y;
};
const BesselRef bessel_refs[] = {
    {0, 2.0, 0.22389077914123566805, 0.5103756726497451196},
    {1, 3.7, 0.053833987745461790513, 0.41667437268380749329},
    {2, 5.5, -0.11731548164728747597, 0.33084123326140572253},
    {4, 11.0, -0.015039500747028133147, -0.2485117873888777589},
    {5, 17.25, -0.19545010943925515966, 0.018231179734930605965},
    {8, 23.5, 0.084484078378061126311, -0.14717271470451477167},
    {9, 2.5, 0.000017541957617676011693, -2100.1121392746689267},
    {9, 40.0, 0.073500105637652497631, 0.10454793788604508125},
    {3, 31.1, 0.11752163310478443834, 0.08216954082702315706},
    {6, 7.75, 0.35009494011329845819, -0.020661299372602446609},
};

// First four roots of the annulus cross product, ra = 1/2, rb = 1 (mpmath).
const double annulus_roots[][4] = {
    {6.24606183919138441, 12.5468714279843613, 18.8364150845031539, 25.1228463710507262},
    {6.39315676162127001, 12.6246990207465263, 18.8889298509645455, 25.1624056202082169},
    {6.81384285313505069, 12.8555318451921208, 19.0457045399066771, 25.2807623389875593},
};

double wave_residual(const ExactSolution& s, double x, double y, double t)
{
  const double c2 = s.c * s.c;
  return eval_solution(s, x, y, t, 0, 0, 2) - c2 * (eval_solution(s, x, y, t, 2, 0, 0) + eval_solution(s, x, y, t, 0, 2, 0));
}

}  // namespace

TEST(Bessel, MatchesHighPrecisionValues)
{
  for (const auto& r : bessel_refs) {
    EXPECT_NEAR(std::cyl_bessel_j(r.n, r.x), r.j, 1e-12 * std::abs(r.j)) << r.n << " " << r.x;
    EXPECT_NEAR(std::cyl_neumann(r.n, r.x), r.y, 1e-12 * std::abs(r.y)) << r.n << " " << r.x;
  }
  EXPECT_EQ(std::cyl_bessel_j(0, 0.0), 1.0);
}

TEST(AnnulusEigenvalue, MatchesHighPrecisionRoots)
{
  for (int n = 0; n <= 2; ++n)
    for (int k = 1; k <= 4; ++k)
      EXPECT_NEAR(annulus_eigenvalue(n, k, 0.5, 1.0), annulus_roots[n][k - 1], 1e-11) << n << " " << k;
  EXPECT_NEAR(annulus_eigenvalue(4, 1, 0.5, 1.0), 8.2667304353601039, 1e-11);
  EXPECT_NEAR(annulus_eigenvalue(8, 2, 0.5, 1.0), 16.8411378093654277, 1e-11);
}

TEST(AnnulusEigenvalue, ResidualAndOrdering)
{
  const double l1 = annulus_eigenvalue(1, 1, 0.5, 1.0);
  EXPECT_LT(std::abs(annulus_cross_product(1, l1, 0.5, 1.0)), 1e-12);
  double prev = 0;
  for (int k = 1; k <= 3; ++k) {
    const double l = annulus_eigenvalue(2, k, 0.5, 1.0);
    EXPECT_GT(l, prev);
    prev = l;
  }
  const double l0 = annulus_eigenvalue(0, 1, 0.5, 1.0);
  EXPECT_GT(l0, 2 * M_PI - 1);
  EXPECT_LT(l0, 2 * M_PI + 1);
}

TEST(AnnulusEigenvalue, BadInput)
{
  EXPECT_THROW(annulus_eigenvalue(1, 0, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(annulus_eigenvalue(1, 1, 1.0, 0.5), std::invalid_argument);
}

TEST(Sine, ValuesAtOrigin)
{
  const auto s = ExactSolution::sine(1, 1, 1);
  EXPECT_DOUBLE_EQ(s.omega, std::sqrt(2.0));
  EXPECT_NEAR(eval_solution(s, 0, 0, 0), 0.0, 1e-15);
  EXPECT_NEAR(eval_solution(s, 0, 0, 0, 0, 0, 1), -s.omega, 1e-15);
}

TEST(SquareEig, PeakValue)
{
  const auto s = ExactSolution::square_eig(1, 1, 1);
  EXPECT_NEAR(eval_solution(s, 0.5, 0.5, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(s.omega, M_PI * std::sqrt(2.0), 1e-14);
}

TEST(Solutions, SatisfyWaveEquation)
{
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  const ExactSolution sols[] = {ExactSolution::sine(2, 2, 1.0), ExactSolution::sine(1, 3, 0.7),
                                ExactSolution::square_eig(2, 1, 1.3), ExactSolution::annulus_eig(4, 2),
                                ExactSolution::annulus_eig(2, 1, 0.5, 1.0, 0.9)};
  for (const auto& s : sols)
    for (int k = 0; k < 100; ++k) {
      double x = U(rng), y = U(rng);
      if (s.kind == SolutionKind::annulus_eig) {
        const double rho = 0.5 + 0.5 * U(rng), th = 2 * M_PI * U(rng);
        x = rho * std::cos(th);
        y = rho * std::sin(th);
      }
      const double t = U(rng);
      const double scale = std::abs(eval_solution(s, x, y, t, 0, 0, 2)) + s.omega * s.omega;
      EXPECT_LT(std::abs(wave_residual(s, x, y, t)), 1e-9 * scale) << to_string(s.kind);
    }
}

TEST(Solutions, AnnulusDerivativesMatchDifferences)
{
  const auto s = ExactSolution::annulus_eig(2, 1);
  const double x = 0.4, y = 0.55, t = 0.3, h = 1e-5;
  auto u = [&](double a, double b) { return eval_solution(s, a, b, t); };
  EXPECT_NEAR(eval_solution(s, x, y, t, 1, 0, 0), (u(x + h, y) - u(x - h, y)) / (2 * h), 1e-8);
  EXPECT_NEAR(eval_solution(s, x, y, t, 0, 1, 0), (u(x, y + h) - u(x, y - h)) / (2 * h), 1e-8);
  const double hh = 1e-4;
  const double uxy = (u(x + hh, y + hh) - u(x + hh, y - hh) - u(x - hh, y + hh) + u(x - hh, y - hh)) / (4 * hh * hh);
  EXPECT_NEAR(eval_solution(s, x, y, t, 1, 1, 0), uxy, 1e-5);
  EXPECT_THROW(eval_solution(s, x, y, t, 2, 1, 0), std::domain_error);
}

TEST(Solutions, AnnulusVanishesOnBothCircles)
{
  const auto s = ExactSolution::annulus_eig(4, 2);
  for (double th : {0.0, 0.3, 1.7})
    for (double rho : {0.5, 1.0}) EXPECT_NEAR(eval_solution(s, rho * std::cos(th), rho * std::sin(th), 0.2), 0.0, 1e-12);
}

TEST(Solutions, MixedPartialsSymmetric)
{
  const auto s = ExactSolution::sine(2, 3, 1.0);
  const double e = 1e-6;
  const double dxy = (eval_solution(s, 0.3 + e, 0.2, 0.1, 1, 2, 1) - eval_solution(s, 0.3 - e, 0.2, 0.1, 1, 2, 1)) / (2 * e);
  EXPECT_NEAR(eval_solution(s, 0.3, 0.2, 0.1, 2, 2, 1), dxy, 1e-6 * std::abs(dxy) + 1e-6);
  const auto a = ExactSolution::annulus_eig(3, 1);
  const double x = -0.3, y = 0.6;
  const double h = 1e-5;
  const double d = (eval_solution(a, x, y + h, 0, 1, 0, 0) - eval_solution(a, x, y - h, 0, 1, 0, 0)) / (2 * h);
  EXPECT_NEAR(eval_solution(a, x, y, 0, 1, 1, 0), d, 1e-7);
}

TEST(BoundaryData, IdentitySineLeftFace)
{
  const auto s = ExactSolution::sine(2, 2, 1.0);
  const FaceBc f{Axis::r, 0, Bc::dirichlet};
  const double y = 0.3, t = 0.2;
  const auto v = boundary_derivatives(s, Mapping::identity(), f, {0.0, y}, 0.1, 2, t);
  EXPECT_NEAR(v[0], std::sin(2 * y - s.omega * t), 1e-15);
  EXPECT_NEAR(v[6], -s.omega * s.omega * v[0], 1e-12);
}

TEST(BoundaryData, EigenfunctionTraceVanishes)
{
  const int m = 2, d = 2 * m + 1;
  const auto s = ExactSolution::square_eig(1, 2);
  const FaceBc f{Axis::s, 1, Bc::dirichlet};
  const auto v = boundary_derivatives(s, Mapping::identity(), f, {0.35, 1.0}, 0.1, m, 0.4);
  for (int q = 0; q <= m; ++q)
    for (int a = 0; a <= d; ++a)
      EXPECT_NEAR(v[static_cast<std::size_t>(q * (d + 1) + a)], 0.0, 1e-14 * std::pow(M_PI, a) * std::pow(s.omega, 2 * q));
  // Fitted path: rounding noise is amplified by alpha!/h^alpha.
  const auto an = ExactSolution::annulus_eig(4, 2);
  const FaceBc fa{Axis::r, 1, Bc::dirichlet};
  const double h = 1.0 / 40;
  const auto w = boundary_derivatives(an, Mapping::annulus(), fa, {1.0, 0.3}, h, m, 0.4);
  for (int q = 0; q <= m; ++q)
    for (int a = 0; a <= d; ++a)
      EXPECT_NEAR(w[static_cast<std::size_t>(q * (d + 1) + a)], 0.0,
                  1e-12 * factorial(a) / std::pow(h, a) * std::pow(an.omega, 2 * q));
}

TEST(BoundaryData, FittedPathMatchesAnalyticOnIdentity)
{
  // A custom identity map forces the fitted path.
  const Mapping id = Mapping::custom([](Vec2 r) { return r; });
  const auto s = ExactSolution::sine(2, 1, 1.0);
  for (Bc bc : {Bc::dirichlet, Bc::neumann})
    for (Axis ax : {Axis::r, Axis::s}) {
      const FaceBc f{ax, 0, bc};
      const Vec2 rs = ax == Axis::r ? Vec2{0.0, 0.4} : Vec2{0.4, 0.0};
      const int m = 2;
      const double h = 0.02;
      const auto a = boundary_derivatives(s, Mapping::identity(), f, rs, h, m, 0.3);
      const auto b = boundary_derivatives(s, id, f, rs, h, m, 0.3);
      for (int q = 0; q <= m; ++q)
        for (int al = 0; al <= 2 * m + 1; ++al) {
          const auto k = static_cast<std::size_t>(q * (2 * m + 2) + al);
          // Fit error of the alpha-th derivative is O(h^(2m+2-alpha)).
          const double tol = 1e-8 * std::pow(3.0, al) * std::pow(h, -std::max(0, al - 2)) * std::pow(s.omega, 2 * q);
          EXPECT_NEAR(b[k], a[k], tol) << to_string(bc) << " q=" << q << " alpha=" << al;
        }
    }
}

TEST(BoundaryData, NeumannOnMappedFaceUsesGradientDirection)
{
  // Rhombus x = r + 0.1 s: grad r = (1, -0.1); left face flux (u_x - 0.1 u_y) / |grad r|.
  const Mapping g = Mapping::rhombus(0.1, 0.1);
  const auto s = ExactSolution::sine(1, 2, 1.0);
  const FaceBc f{Axis::r, 0, Bc::neumann};
  const Vec2 rs{0.0, 0.5};
  const Vec2 X = map_eval(g, rs);
  const auto im = inverse_metrics(g, rs);
  const double ref = (im[0] * eval_solution(s, X[0], X[1], 0.1, 1, 0, 0) + im[1] * eval_solution(s, X[0], X[1], 0.1, 0, 1, 0)) /
                     std::hypot(im[0], im[1]);
  EXPECT_NEAR(boundary_value(s, g, f, rs, 0.1, 0), ref, 1e-14);
  const auto v = boundary_derivatives(s, g, f, rs, 0.05, 1, 0.1);
  // The fit interpolates at Chebyshev points, not at the node itself.
  EXPECT_NEAR(v[0], ref, 1e-6);
}

TEST(BoundaryData, ChainRuleMatchesTwoDimensionalFit)
{
  // Tangential derivatives along s on r = 0 equal the s-derivatives of the 2-D fit of the composed function.
  const Mapping g = Mapping::polynomial(0.5);
  const auto s = ExactSolution::sine(2, 2, 1.0);
  const int m = 2, d = 2 * m + 1;
  const double h = 0.02;
  const Vec2 rs{0.0, 0.45};
  auto comp = [&](double r, double ss) {
    const Vec2 X = map_eval(g, {r, ss});
    return eval_solution(s, X[0], X[1], 0.2);
  };
  const auto fit2 = fit_taylor_2d(d, {rs[0], rs[1]}, {h, h}, comp);
  const auto v = boundary_derivatives(s, g, FaceBc{Axis::r, 0, Bc::dirichlet}, rs, h, m, 0.2);
  for (int a = 0; a <= 3; ++a) EXPECT_NEAR(v[static_cast<std::size_t>(a)], fit2(0, a) * factorial(a) / std::pow(h, a), 1e-8 * std::pow(10.0, a));
}
