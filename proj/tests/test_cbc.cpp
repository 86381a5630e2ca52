#include "hermite/cbc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hermite;

namespace {

struct Kind {
  const char* name;
  Bc a;
  std::optional<Bc> b;
};

const Kind kinds[] = {{"D", Bc::dirichlet, std::nullopt},
                      {"N", Bc::neumann, std::nullopt},
                      {"DD", Bc::dirichlet, Bc::dirichlet},
                      {"NN", Bc::neumann, Bc::neumann},
                      {"DN", Bc::neumann, Bc::dirichlet}};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Dense monomial polynomial sum a(i, j) x^i y^j.
struct Poly {
  int d;
  std::vector<double> a;
  double coef(int i, int j) const { return (i < 0 || j < 0 || i > d || j > d) ? 0.0 : a[static_cast<std::size_t>(i + (d + 1) * j)]; }
  double operator()(double x, double y) const
  {
    double v = 0;
    for (int j = 0; j <= d; ++j)
      for (int i = 0; i <= d; ++i) v += coef(i, j) * std::pow(x, i) * std::pow(y, j);
    return v;
  }
  Poly dx() const
  {
    Poly p{d, std::vector<double>(a.size(), 0.0)};
    for (int j = 0; j <= d; ++j)
      for (int i = 0; i < d; ++i) p.a[static_cast<std::size_t>(i + (d + 1) * j)] = (i + 1) * coef(i + 1, j);
    return p;
  }
  Poly dy() const
  {
    Poly p{d, std::vector<double>(a.size(), 0.0)};
    for (int j = 0; j < d; ++j)
      for (int i = 0; i <= d; ++i) p.a[static_cast<std::size_t>(i + (d + 1) * j)] = (j + 1) * coef(i, j + 1);
    return p;
  }
  Poly lap(double c) const
  {
    Poly xx = dx().dx(), yy = dy().dy();
    for (std::size_t k = 0; k < a.size(); ++k) xx.a[k] = c * c * (xx.a[k] + yy.a[k]);
    return xx;
  }
};

// Exact scaled Taylor coefficients of P at (x, y).
TaylorCoeffs2D taylor_of(const Poly& P, double x, double y, int d, double hx, double hy)
{
  TaylorCoeffs2D t(d, d, x, y, hx, hy);
  Poly py = P;
  for (int l2 = 0; l2 <= d; ++l2) {
    Poly pxy = py;
    for (int l1 = 0; l1 <= d; ++l1) {
      t(l1, l2) = pxy(x, y) * std::pow(hx, l1) * std::pow(hy, l2) / (factorial(l1) * factorial(l2));
      pxy = pxy.dx();
    }
    py = py.dy();
  }
  return t;
}

Poly random_poly(int d, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  Poly p{d, std::vector<double>(static_cast<std::size_t>((d + 1) * (d + 1)))};
  for (double& v : p.a) v = U(rng);
  return p;
}

}  // namespace

TEST(Conditioning, DirichletFaceExactValues)
{
  EXPECT_LT(rel(condition_number_inf(cartesian_system(1, Bc::dirichlet, std::nullopt, 1.0)), 4961.0 / 16), 1e-10);
  EXPECT_LT(rel(condition_number_inf(cartesian_system(2, Bc::dirichlet, std::nullopt, 1.0)), 5909931.0 / 1024), 1e-10);
}

TEST(Conditioning, NeumannFaceExactValue)
{
  EXPECT_LT(rel(condition_number_inf(cartesian_system(1, Bc::neumann, std::nullopt, 1.0)), 15125.0 / 256), 1e-10);
}

TEST(Conditioning, MatchesTableToTwoFigures)
{
  const double table[5][5] = {{3.1e2, 5.8e3, 1.3e5, 3.8e6, 9.7e7},
                              {5.9e1, 7.0e2, 1.4e4, 3.3e5, 7.5e6},
                              {5.4e2, 8.3e3, 1.8e5, 4.8e6, 1.2e8},
                              {5.7e1, 2.7e2, 2.9e3, 3.8e4, 6.3e5},
                              {1.6e2, 1.4e3, 2.2e4, 4.2e5, 8.5e6}};
  for (int k = 0; k < 5; ++k)
    for (int m = 1; m <= 5; ++m) {
      const double kap = condition_number_inf(cartesian_system(m, kinds[k].a, kinds[k].b, 1.0));
      const double e = std::floor(std::log10(kap));
      const double rounded = std::round(kap / std::pow(10.0, e - 1)) * std::pow(10.0, e - 1);
      EXPECT_NEAR(rounded, table[k][m - 1], 1e-9 * table[k][m - 1]) << kinds[k].name << " m=" << m << " kappa=" << kap;
    }
}

TEST(Conditioning, CornerClosedFormsAtM1)
{
  EXPECT_NEAR(condition_number_inf(cartesian_system(1, Bc::dirichlet, Bc::dirichlet, 1.0)), 536.9, 0.1);
  EXPECT_NEAR(condition_number_inf(cartesian_system(1, Bc::neumann, Bc::neumann, 1.0)), 57.19, 0.01);
  EXPECT_NEAR(condition_number_inf(cartesian_system(1, Bc::neumann, Bc::dirichlet, 1.0)), 162.6, 0.1);
}

TEST(Conditioning, GammaDependenceMatchesClosedForms)
{
  for (double g : {0.5, 1.0, 2.0, 4.0}) {
    const double g2 = g * g, ig = 1.0 / g2;
    const double face_d = std::max(41.0, 28.0 + 3 * g2) * std::max(121.0 / 16, 1 + g2);
    const double face_n = std::max({125.0 / 16, 1 + g2, 21.0 / 4 + 3 * g2 / 4}) * std::max(121.0 / 16, 1 + g2);
    const double dd = std::max({71.0, 95.0 / 2 + 3 * ig, 95.0 / 2 + 3 * g2, 485.0 / 16 + 3 * g2 / 4 + 3 * ig / 4}) *
                      std::max({121.0 / 16, 1.0 / 3 + ig, 1.0 / 3 + g2});
    const double nn = std::max({121.0 / 16, 1 + ig / 3, 1 + g2 / 3, 247.0 / 64 + ig / 4, 247.0 / 64 + g2 / 4,
                                585.0 / 256 + g2 / 48 + ig / 48}) *
                      std::max({121.0 / 16, 1 + ig / 3, 1 + g2 / 3});
    const double dn = std::max({43.0 / 2, 1 + ig, 115.0 / 8 + g2, 227.0 / 16 + 3 * ig / 4, 573.0 / 64 + g2 / 4 + ig / 16}) *
                      std::max({121.0 / 16, 1 + ig, 1 + g2});
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(1, Bc::dirichlet, std::nullopt, g)), face_d), 1e-10) << g;
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(1, Bc::neumann, std::nullopt, g)), face_n), 1e-10) << g;
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(1, Bc::dirichlet, Bc::dirichlet, g)), dd), 1e-10) << g;
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(1, Bc::neumann, Bc::neumann, g)), nn), 1e-10) << g;
    // Dirichlet on the x = const face, Neumann on the y = const face.
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(1, Bc::dirichlet, Bc::neumann, g)), dn), 1e-10) << g;
  }
}

TEST(Conditioning, GammaDependenceAtM2)
{
  for (double g : {0.5, 2.0, 4.0}) {
    const double g2 = g * g, g4 = g2 * g2;
    const double d = std::max({1819.0 / 4, 371 + 25 * g2 / 2, 597.0 / 2 + 65 * g2 / 4, 5 + 5 * g4 + 10 * g2,
                               1917.0 / 16 + 21 * g2 / 2 + 15 * g4 / 4}) *
                     std::max({3249.0 / 256, 1 + g2, 1 + g2 / 3 + g4});
    const double n = std::max({883.0 / 16, 373.0 / 8 + 35 * g2 / 8, 1 + g4 + 2 * g2, 471.0 / 32 + 21 * g2 / 8 + 15 * g4 / 16}) *
                     std::max({3249.0 / 256, 1 + g2, 1 + 3 * g2 / 5 + g4});
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(2, Bc::dirichlet, std::nullopt, g)), d), 1e-10) << g;
    EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(2, Bc::neumann, std::nullopt, g)), n), 1e-10) << g;
  }
}

TEST(Conditioning, FixedScalingAgreesWithRowScalingAtUnitRatio)
{
  for (const Kind& k : kinds)
    for (int m = 1; m <= 3; ++m)
      EXPECT_LT(rel(kappa_inf(cartesian_fixed_scaled(m, k.a, k.b, 1.0)),
                    condition_number_inf(cartesian_system(m, k.a, k.b, 1.0))),
                1e-10);
}

TEST(Conditioning, MeshIndependent)
{
  for (const Kind& k : kinds)
    for (int m = 1; m <= 4; ++m) {
      const double k0 = condition_number_inf(cartesian_system(m, k.a, k.b, 1.0, 0.1));
      for (double f : {2.0, 4.0}) {
        const double k1 = condition_number_inf(cartesian_system(m, k.a, k.b, 1.0, 0.1 / f));
        EXPECT_LT(rel(k1, k0), 1e-10) << k.name << " m=" << m << " refine " << f;
      }
    }
}

TEST(Conditioning, EquilibrationSameOrderOfMagnitude)
{
  for (const Kind& k : kinds) {
    const auto sys = cartesian_system(2, k.a, k.b, 1.0);
    const double r = condition_number_inf(sys), e = condition_number_inf(sys, Scaling::equilibrate);
    EXPECT_TRUE(std::isfinite(e));
    EXPECT_LT(std::abs(std::log10(e / r)), 1.5) << k.name;
  }
}

TEST(CornerAveraging, OtherDnPairingIsSingular)
{
  for (int m = 1; m <= 3; ++m) {
    const auto sys = cartesian_system(m, Bc::neumann, Bc::dirichlet, 1.0, 0.1, 1.0, DnAverage::n2q1_d2q);
    EXPECT_THROW(check_pivots(sys, "test"), SingularSystem);
  }
}

TEST(CornerAveraging, DnAndNdAreMirrorImages)
{
  for (int m = 1; m <= 3; ++m) {
    const double a = condition_number_inf(cartesian_system(m, Bc::neumann, Bc::dirichlet, 1.0));
    const double b = condition_number_inf(cartesian_system(m, Bc::dirichlet, Bc::neumann, 1.0));
    EXPECT_LT(rel(a, b), 1e-10);
  }
}

TEST(CornerAveraging, RowCounts)
{
  for (int m = 1; m <= 4; ++m) {
    for (const Kind& k : kinds) {
      const auto sys = cartesian_system(m, k.a, k.b, 1.0);
      int interp = 0;
      for (const auto& t : sys.rows) interp += t.kind == RowKind::interp;
      const int n = (2 * m + 2) * (2 * m + 2);
      EXPECT_EQ(sys.size(), n);
      EXPECT_EQ(interp, k.b ? (m + 1) * (m + 1) : 2 * (m + 1) * (m + 1));
      if (k.b) {
        EXPECT_EQ(n - interp, 3 * (m + 1) * (m + 1));
      }
    }
  }
}

TEST(Assembly, IdentityMapEqualsCartesianClosedForm)
{
  const double hx = 0.1, hy = 0.05, c = 1.3;
  for (int m = 1; m <= 4; ++m)
    for (const Kind& k : kinds) {
      std::vector<FaceBc> faces{{Axis::r, 0, k.a}};
      if (k.b) faces.push_back({Axis::s, 0, *k.b});
      std::vector<FaceTag> tags;
      for (const auto& f : faces) tags.push_back({f.axis, f.side});
      const MetricSet ms = metric_polys(Mapping::identity(), {0.0, 0.0}, {hx, hy}, c, m, tags);
      const auto ops = curvilinear_operators(ms, m, faces);
      const CbcSystem curv =
          faces.size() == 1 ? assemble_face(ops, faces[0], m) : assemble_corner(ops, faces[0], faces[1], m);
      const CbcSystem closed = assemble_cartesian_closed(m, faces, hx, hy, c);
      ASSERT_EQ(curv.M.rows(), closed.M.rows());
      EXPECT_LT((curv.M - closed.M).cwiseAbs().maxCoeff(), 1e-12) << k.name << " m=" << m;
    }
}

TEST(Assembly, OppositeFacesMatchClosedForm)
{
  const double hx = 0.1, hy = 0.1;
  for (int m = 1; m <= 3; ++m)
    for (Bc bc : {Bc::dirichlet, Bc::neumann})
      for (Axis ax : {Axis::r, Axis::s}) {
        const FaceBc f{ax, 1, bc};
        const MetricSet ms = metric_polys(Mapping::identity(), {1.0, 1.0}, {hx, hy}, 1.0, m,
                                          std::vector<FaceTag>{{ax, 1}});
        const CbcSystem curv = assemble_face(curvilinear_operators(ms, m, {&f, 1}), f, m);
        const CbcSystem closed = assemble_cartesian_closed(m, std::vector<FaceBc>{f}, hx, hy, 1.0);
        EXPECT_LT((curv.M - closed.M).cwiseAbs().maxCoeff(), 1e-12);
      }
}

TEST(Solve, ExactForGlobalPolynomial)
{
  const double c = 0.8, hx = 0.1, hy = 0.125;
  for (int m = 1; m <= 3; ++m)
    for (const Kind& k : kinds) {
      const int d = 2 * m + 1;
      const Poly P = random_poly(d, 17u + static_cast<unsigned>(m));
      std::vector<FaceBc> faces{{Axis::r, 0, k.a}};
      if (k.b) faces.push_back({Axis::s, 0, *k.b});
      const auto ops = cartesian_operators(m, hx, hy, c);
      const CbcSystem sys =
          faces.size() == 1 ? assemble_face(ops, faces[0], m) : assemble_corner(ops, faces[0], faces[1], m);
      const Vec2 x0{0.0, 0.0};
      std::vector<TaylorCoeffs2D> nb;
      for (const Vec2& o : sys.neighbor_offsets)
        nb.push_back(taylor_of(P, x0[0] + o[0] * hx, x0[1] + o[1] * hy, m, hx, hy));
      std::vector<const TaylorCoeffs2D*> ptr;
      for (const auto& p : nb) ptr.push_back(&p);
      // d_t^(2q) of the BC is (c^2 Lap)^q applied to the boundary quantity.
      BoundaryData data = [&](int face, int q, int alpha) {
        const FaceBc& f = sys.faces[static_cast<std::size_t>(face)];
        Poly w = P;
        for (int i = 0; i < q; ++i) w = w.lap(c);
        if (f.type == Bc::neumann) w = f.axis == Axis::r ? w.dx() : w.dy();
        for (int i = 0; i < alpha; ++i) w = f.axis == Axis::r ? w.dy() : w.dx();
        return w(x0[0], x0[1]);
      };
      const auto rhs = build_rhs(sys, ptr, data);
      check_pivots(sys, "origin");
      const TaylorCoeffs2D sol = solve_boundary(sys, rhs, x0);
      const TaylorCoeffs2D ref = taylor_of(P, x0[0], x0[1], d, hx, hy);
      double err = 0;
      for (std::size_t i = 0; i < sol.c.size(); ++i) err = std::max(err, std::abs(sol.c[i] - ref.c[i]));
      EXPECT_LT(err, 1e-11 * std::max(1.0, ref.max_abs())) << k.name << " m=" << m;
      EXPECT_LT(residual(sys, rhs, sol), 1e-12);
    }
}

TEST(Solve, ZeroDataGivesZero)
{
  const auto sys = cartesian_system(2, Bc::dirichlet, Bc::neumann, 1.0);
  TaylorCoeffs2D z(2, 2, 0.5, 0.5, 0.1, 0.1);
  std::vector<const TaylorCoeffs2D*> ptr{&z};
  const auto sol = solve_boundary(sys, build_rhs(sys, ptr, BoundaryData{}), {0.0, 0.0});
  EXPECT_EQ(sol.max_abs(), 0.0);
}

TEST(Solve, CurvilinearCornerNonsingular)
{
  // Rhombus corner: non-orthogonal metric terms mixing both directions.
  const Mapping g = Mapping::rhombus(0.1, 0.1);
  const double h = 0.05;
  for (int m = 1; m <= 3; ++m)
    for (const Kind& k : kinds) {
      if (!k.b) continue;
      const std::vector<FaceBc> faces{{Axis::r, 0, k.a}, {Axis::s, 0, *k.b}};
      const MetricSet ms = metric_polys(g, {0.0, 0.0}, {h, h}, 1.0, m, std::vector<FaceTag>{{Axis::r, 0}, {Axis::s, 0}});
      const CbcSystem sys = assemble_corner(curvilinear_operators(ms, m, faces), faces[0], faces[1], m);
      EXPECT_NO_THROW(check_pivots(sys, "corner")) << k.name << " m=" << m;
      EXPECT_LT(condition_number_inf(sys), 1e9);
    }
}

TEST(Solvability, DeterminantFollowsGPolynomials)
{
  auto G = [](int m, Bc bc, double x) {
    double p;
    if (bc == Bc::dirichlet)
      p = m == 1 ? 1 - x / 4 : 1 - 9.0 / 16 * x + 3.0 / 32 * x * x - x * x * x / 192;
    else
      p = m == 1 ? 1 - x / 2 : 1 - x + x * x / 4 - x * x * x / 48;
    return std::pow(p, 2 * m + 2);
  };
  for (int m = 1; m <= 2; ++m)
    for (Bc bc : {Bc::dirichlet, Bc::neumann})
      for (double xi : {-0.7, 0.3, 1.0, 1.7}) {
        const auto p = det_probe(m, bc, 1.0, 1.0, 0.0, 2 * xi / 0.1, 0.0, 0.1, 0.1);
        EXPECT_NEAR(p.xi, xi, 1e-14);
        EXPECT_LT(rel(p.det_ratio, G(m, bc, xi)), 1e-9) << m << " " << to_string(bc) << " xi=" << xi;
      }
}

TEST(Solvability, DeterminantIndependentOfCrossAndTangentialTerms)
{
  // det depends on c10 only through xi; c11 and c01 shift nothing.
  const auto a = det_probe(2, Bc::dirichlet, 1.0, 1.0, 0.0, 10.0, 0.0, 0.1, 0.1);
  const auto b = det_probe(2, Bc::dirichlet, 1.0, 1.7, 0.3, 10.0, -2.0, 0.1, 0.1);
  EXPECT_LT(rel(b.det_ratio, a.det_ratio), 1e-9);
}

TEST(Solvability, ZeroXiNonsingular)
{
  for (int m = 1; m <= 3; ++m) {
    const auto p = det_probe(m, Bc::neumann, 1.0, 1.0, 0.0, 0.0, 0.0, 0.1, 0.1);
    EXPECT_EQ(p.xi, 0.0);
    EXPECT_GT(p.min_singular_value, 1e-6);
    EXPECT_NEAR(p.det_ratio, 1.0, 1e-12);
  }
}

TEST(Solvability, SweepFindsM1Roots)
{
  EXPECT_NEAR(det_sweep(1, Bc::dirichlet), 4.0, 0.04);
  EXPECT_NEAR(det_sweep(1, Bc::neumann), 2.0, 0.02);
}

TEST(Solvability, SweepFindsSmallestPositiveRootOfG)
{
  // Smallest positive real roots of the bracketed G polynomials.
  EXPECT_NEAR(det_sweep(2, Bc::dirichlet), 3.1155009, 1e-3);
  EXPECT_NEAR(det_sweep(2, Bc::neumann), 1.48, 0.03);
  EXPECT_NEAR(det_sweep(3, Bc::dirichlet), 2.6493622, 1e-3);
  EXPECT_NEAR(det_sweep(3, Bc::neumann), 1.2295422, 1e-3);
}

TEST(Symmetry, ForbiddenParityVanishes)
{
  for (int m = 1; m <= 4; ++m) {
    EXPECT_LT(symmetry_check(m, Bc::dirichlet), 1e-11) << m;
    EXPECT_LT(symmetry_check(m, Bc::neumann), 1e-11) << m;
  }
}

TEST(Errors, SingularSystemNamesNode)
{
  const auto sys = cartesian_system(1, Bc::neumann, Bc::dirichlet, 1.0, 0.1, 1.0, DnAverage::n2q1_d2q);
  try {
    check_pivots(sys, "node (0, 0)");
    FAIL();
  } catch (const SingularSystem& e) {
    EXPECT_NE(std::string(e.what()).find("node (0, 0)"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("r=0:N"), std::string::npos);
  }
}

TEST(Errors, PeriodicFaceRejected)
{
  const auto ops = cartesian_operators(1, 0.1, 0.1, 1.0);
  EXPECT_THROW(assemble_face(ops, FaceBc{Axis::r, 0, Bc::periodic}, 1), std::invalid_argument);
}
