#pragma once

// Full Hermite time stepping on a mapped grid: interpolate to the dual grid,
// evolve, close the primal boundary with CBC solves, interpolate back, evolve.

#include "hermite/cbc.hpp"
#include "hermite/evolution.hpp"
#include "hermite/geometry.hpp"
#include "hermite/grid.hpp"
#include "hermite/solutions.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermite {

enum class Scheme { fot, sot };

inline std::string to_string(Scheme s) { return s == Scheme::fot ? "FOT" : "SOT"; }

/// Face order used throughout: r=0, r=1, s=0, s=1.
inline FaceBc face_of(int k, Bc type) { return {k < 2 ? Axis::r : Axis::s, k % 2, type}; }

struct SolverSetup {
  Scheme scheme = Scheme::sot;
  int m = 1;
  Mapping mapping;
  int N1 = 10, N2 = 10;
  std::array<Bc, 4> bc{Bc::dirichlet, Bc::dirichlet, Bc::dirichlet, Bc::dirichlet};
  ExactSolution solution = ExactSolution::sine(1, 1);
  double cfl = 0.4;
  double t_final = 0.5;
  int smoothing = 0;
  bool zero_data = false;  // zero initial and boundary data
  DnAverage dn = DnAverage::n2q_d2q1;

  GridSpec grid() const
  {
    GridSpec g{N1, N2};
    g.periodic_s = bc[2] == Bc::periodic;
    return g;
  }

  void validate() const
  {
    auto fail = [](const std::string& s) { throw std::invalid_argument("solver setup: " + s); };
    if (m < 1 || m > 5) fail("m must be in 1..5");
    if (N1 < 2 || N2 < 2) fail("N1 and N2 must be >= 2");
    if (!(cfl > 0)) fail("cfl must be positive");
    if (!(t_final > 0)) fail("t_final must be positive");
    if (smoothing < 0) fail("smoothing steps must be >= 0");
    if (bc[0] == Bc::periodic || bc[1] == Bc::periodic) fail("periodic r faces are not supported");
    if ((bc[2] == Bc::periodic) != (bc[3] == Bc::periodic)) fail("s faces must both be periodic or neither");
    if ((bc[2] == Bc::periodic) != mapping.periodic_s()) fail("periodic s faces go with the annulus mapping only");
    if (solution.kind == SolutionKind::annulus_eig && mapping.kind != MapKind::annulus)
      fail("the annulus eigenfunction needs the annulus mapping");
  }
};

/// Raised when a non-finite DOF appears.
struct Instability : std::runtime_error {
  int step;
  Instability(const std::string& what, int step_) : std::runtime_error(what), step(step_) {}
};

class Solver {
 public:
  explicit Solver(SolverSetup setup) : s_(std::move(setup))
  {
    s_.validate();
    g_ = s_.grid();
    m_ = s_.m;
    c_ = s_.solution.c;
    dt_ = choose_dt(c_, dx_min(s_.mapping, g_), s_.cfl, s_.t_final);
    steps_ = step_count(s_.t_final, dt_);
    cartesian_ = s_.mapping.is_identity();
    build_metrics();
    build_boundary();
    initialize();
  }

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  int step_index() const { return n_; }
  double time() const { return n_ * dt_; }
  const HermiteField& u() const { return u_; }
  const SolverSetup& setup() const { return s_; }

  /// One full step t -> t + dt. Throws Instability on a non-finite DOF.
  void step()
  {
    const double t = time();
    if (s_.scheme == Scheme::sot) {
      const HermiteField ubar_d = hermite_interp_2d(u_, m_);
      HermiteField ud(g_, Location::dual, m_);
      for_each_node(ud, [&](int i, int j, TaylorCoeffs2D& out) {
        out = evolve_sot(dual_op(i, j), ubar_d.at(i, j), ud_prev_.at(i, j), dt_, m_);
      });
      HermiteField ubar_p = hermite_interp_2d(ud, m_);
      close_boundary(ud, ubar_p, t + 0.5 * dt_, false);
      HermiteField un(g_, Location::primal, m_);
      for_each_node(un, [&](int i, int j, TaylorCoeffs2D& out) {
        out = evolve_sot(primal_op(i, j), ubar_p.at(i, j), u_.at(i, j), dt_, m_);
      });
      ud_prev_ = std::move(ud);
      if (s_.smoothing > 0) {
        const double t1 = t + dt_;
        un = smooth(un, m_, s_.smoothing,
                    [&](const HermiteField& dual, HermiteField& pbar) { close_boundary(dual, pbar, t1, false); });
      }
      u_ = std::move(un);
    } else {
      const HermiteField ubar_d = hermite_interp_2d(u_, m_);
      const HermiteField vbar_d = hermite_interp_2d(v_, m_ - 1);
      HermiteField ud(g_, Location::dual, m_), vd(g_, Location::dual, m_ - 1);
      for_each_node(ud, [&](int i, int j, TaylorCoeffs2D& out) {
        auto r = evolve_fot(dual_op(i, j), ubar_d.at(i, j), vbar_d.at(i, j), dt_, m_);
        out = std::move(r.first);
        vd.at(i, j) = std::move(r.second);
      });
      HermiteField ubar_p = hermite_interp_2d(ud, m_), vbar_p = hermite_interp_2d(vd, m_ - 1);
      close_boundary(ud, ubar_p, t + 0.5 * dt_, false);
      close_boundary(vd, vbar_p, t + 0.5 * dt_, true);
      for_each_node(u_, [&](int i, int j, TaylorCoeffs2D& out) {
        auto r = evolve_fot(primal_op(i, j), ubar_p.at(i, j), vbar_p.at(i, j), dt_, m_);
        out = std::move(r.first);
        v_.at(i, j) = std::move(r.second);
      });
    }
    ++n_;
    check_finite();
  }

  /// Relative max-norm error of the (0,0) primal DOFs against the exact solution.
  double error() const
  {
    double emax = 0, umax = 0;
    const double t = time();
    for (int j = 0; j < u_.n2; ++j)
      for (int i = 0; i < u_.n1; ++i) {
        const double ex = exact_at(i, j, t);
        emax = std::max(emax, std::abs(u_.at(i, j)(0, 0) - ex));
        umax = std::max(umax, std::abs(ex));
      }
    return umax > 0 ? emax / umax : emax;
  }

  /// |u - u_exact| of the (0,0) DOF at every primal node, row-major in (i, j).
  std::vector<double> error_field() const
  {
    std::vector<double> e;
    e.reserve(u_.nodes.size());
    const double t = time();
    for (int j = 0; j < u_.n2; ++j)
      for (int i = 0; i < u_.n1; ++i) e.push_back(std::abs(u_.at(i, j)(0, 0) - exact_at(i, j, t)));
    return e;
  }

  /// Run to t_final.
  void run()
  {
    while (n_ < steps_) step();
  }

 private:
  struct BoundaryNode {
    int i = 0, j = 0;
    std::array<std::shared_ptr<const CbcSystem>, 2> sys;  // u system, v system (FOT)
    std::vector<std::array<int, 2>> dual_nb;              // per neighbor offset
  };

  SolverSetup s_;
  GridSpec g_;
  int m_ = 1;
  double c_ = 1;
  double dt_ = 0;
  int steps_ = 0;
  int n_ = 0;
  bool cartesian_ = true;
  std::vector<MetricSet> pm_, dm_;
  std::vector<BoundaryNode> bnodes_;
  HermiteField u_, v_, ud_prev_;

  NodeOperator primal_op(int i, int j) const
  {
    return {cartesian_ ? nullptr : &pm_[static_cast<std::size_t>(i + u_.n1 * j)], c_};
  }
  NodeOperator dual_op(int i, int j) const
  {
    return {cartesian_ ? nullptr : &dm_[static_cast<std::size_t>(i + g_.N1 * j)], c_};
  }

  std::vector<FaceBc> faces_at(int i, int j) const
  {
    std::vector<FaceBc> f;
    const int n1 = node_count(g_, Location::primal, Axis::r), n2 = node_count(g_, Location::primal, Axis::s);
    if (i == 0) f.push_back(face_of(0, s_.bc[0]));
    if (i == n1 - 1) f.push_back(face_of(1, s_.bc[1]));
    if (!g_.periodic_s) {
      if (j == 0) f.push_back(face_of(2, s_.bc[2]));
      if (j == n2 - 1) f.push_back(face_of(3, s_.bc[3]));
    }
    return f;
  }

  void build_metrics()
  {
    if (cartesian_) return;
    const HermiteField pf(g_, Location::primal, 0), df(g_, Location::dual, 0);
    pm_.resize(pf.nodes.size());
    dm_.resize(df.nodes.size());
    for (int j = 0; j < pf.n2; ++j)
      for (int i = 0; i < pf.n1; ++i) {
        std::vector<FaceTag> tags;
        for (const FaceBc& f : faces_at(i, j)) tags.push_back({f.axis, f.side});
        pm_[static_cast<std::size_t>(i + pf.n1 * j)] =
            metric_polys(s_.mapping, node_coord(g_, Location::primal, i, j), g_.spacings(), c_, m_, tags);
      }
    for (int j = 0; j < df.n2; ++j)
      for (int i = 0; i < df.n1; ++i)
        dm_[static_cast<std::size_t>(i + df.n1 * j)] =
            metric_polys(s_.mapping, node_coord(g_, Location::dual, i, j), g_.spacings(), c_, m_);
  }

  std::shared_ptr<const CbcSystem> make_system(int i, int j, const std::vector<FaceBc>& faces, int m) const
  {
    CbcOperators ops;
    if (cartesian_)
      ops = cartesian_operators(m, g_.dr(), g_.ds(), c_);
    else
      ops = curvilinear_operators(pm_[static_cast<std::size_t>(i + u_.n1 * j)], m, faces);
    auto sys = std::make_shared<CbcSystem>(faces.size() == 1 ? assemble_face(ops, faces[0], m)
                                                             : assemble_corner(ops, faces[0], faces[1], m, s_.dn));
    std::ostringstream where;
    where << "primal node (" << i << ", " << j << "), m=" << m;
    check_pivots(*sys, where.str());
    return sys;
  }

  void build_boundary()
  {
    u_ = HermiteField(g_, Location::primal, m_);
    // Cartesian systems depend only on the face set, so they are shared.
    std::vector<std::pair<std::string, std::array<std::shared_ptr<const CbcSystem>, 2>>> shared;
    for (int j = 0; j < u_.n2; ++j)
      for (int i = 0; i < u_.n1; ++i) {
        if (!u_.is_boundary(i, j)) continue;
        const auto faces = faces_at(i, j);
        BoundaryNode b;
        b.i = i;
        b.j = j;
        std::string key;
        for (const auto& f : faces) key += detail::face_label(f) + ";";
        bool found = false;
        if (cartesian_)
          for (const auto& [k, v] : shared)
            if (k == key) {
              b.sys = v;
              found = true;
            }
        if (!found) {
          b.sys[0] = make_system(i, j, faces, m_);
          if (s_.scheme == Scheme::fot) b.sys[1] = make_system(i, j, faces, m_ - 1);
          if (cartesian_) shared.emplace_back(key, b.sys);
        }
        for (const Vec2& o : b.sys[0]->neighbor_offsets) {
          const int di = i + (o[0] > 0 ? 0 : -1), dj = detail::wrap(j + (o[1] > 0 ? 0 : -1), g_.N2, g_.periodic_s);
          b.dual_nb.push_back({di, dj});
        }
        bnodes_.push_back(std::move(b));
      }
  }

  /// Scaled Taylor coefficients (degree d) of d_t^ot u at the node's center.
  TaylorCoeffs2D initial_poly(Vec2 center, int d, int ot) const
  {
    const Vec2 h = g_.spacings();
    if (s_.zero_data) return TaylorCoeffs2D(d, d, center[0], center[1], h[0], h[1]);
    const ExactSolution& sol = s_.solution;
    if (cartesian_) {
      TaylorCoeffs2D p(d, d, center[0], center[1], h[0], h[1]);
      for (int l2 = 0; l2 <= d; ++l2)
        for (int l1 = 0; l1 <= d; ++l1)
          p(l1, l2) = std::pow(h[0], l1) * std::pow(h[1], l2) / (factorial(l1) * factorial(l2)) *
                      eval_solution(sol, center[0], center[1], 0.0, l1, l2, ot);
      return p;
    }
    const int q = 2 * m_ + 1;
    return fit_taylor_2d(q, {center[0], center[1]}, {h[0], h[1]}, [&](double r, double s) {
             const Vec2 X = map_eval(s_.mapping, {r, s});
             return eval_solution(sol, X[0], X[1], 0.0, 0, 0, ot);
           })
        .truncated(d, d);
  }

  void initialize()
  {
    for_each_node(u_, [&](int i, int j, TaylorCoeffs2D& p) { p = initial_poly(node_coord(g_, Location::primal, i, j), m_, 0); });
    if (s_.scheme == Scheme::fot) {
      v_ = HermiteField(g_, Location::primal, m_ - 1);
      for_each_node(v_, [&](int i, int j, TaylorCoeffs2D& p) {
        p = initial_poly(node_coord(g_, Location::primal, i, j), m_ - 1, 1);
      });
      return;
    }
    HermiteField v0(g_, Location::primal, m_);
    for_each_node(v0, [&](int i, int j, TaylorCoeffs2D& p) { p = initial_poly(node_coord(g_, Location::primal, i, j), m_, 1); });
    const HermiteField ub = hermite_interp_2d(u_, m_), vb = hermite_interp_2d(v0, m_);
    ud_prev_ = HermiteField(g_, Location::dual, m_);
    for_each_node(ud_prev_, [&](int i, int j, TaylorCoeffs2D& p) {
      p = first_step_node(dual_op(i, j), ub.at(i, j), vb.at(i, j), dt_, m_);
    });
  }

  /// CBC solves at every boundary primal node at time t; `velocity` selects the
  /// degree m-1 system with odd time derivatives of the data.
  void close_boundary(const HermiteField& dual, HermiteField& pbar, double t, bool velocity) const
  {
    const int m = velocity ? m_ - 1 : m_;
    const int shift = velocity ? 1 : 0;
    const int stride = 2 * m + 2;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < bnodes_.size(); ++k) {
      const BoundaryNode& b = bnodes_[k];
      const CbcSystem& sys = *b.sys[velocity ? 1 : 0];
      const Vec2 rs = node_coord(g_, Location::primal, b.i, b.j);
      std::array<std::vector<double>, 2> table;
      if (!s_.zero_data)
        for (std::size_t f = 0; f < sys.faces.size(); ++f) {
          const double ht = sys.faces[f].axis == Axis::r ? g_.ds() : g_.dr();
          table[f] = boundary_derivatives(s_.solution, s_.mapping, sys.faces[f], rs, ht, m, t, shift);
        }
      std::vector<const TaylorCoeffs2D*> nb;
      for (const auto& d : b.dual_nb) nb.push_back(&dual.at(d[0], d[1]));
      const BoundaryData data = [&](int face, int q, int alpha) {
        const auto& tb = table[static_cast<std::size_t>(face)];
        return tb.empty() ? 0.0 : tb[static_cast<std::size_t>(q * stride + alpha)];
      };
      pbar.at(b.i, b.j) = solve_boundary(sys, build_rhs(sys, nb, data), rs);
    }
  }

  double exact_at(int i, int j, double t) const
  {
    if (s_.zero_data) return 0.0;
    const Vec2 X = map_eval(s_.mapping, node_coord(g_, Location::primal, i, j));
    return eval_solution(s_.solution, X[0], X[1], t);
  }

  void check_finite() const
  {
    auto bad = [](const HermiteField& f) {
      for (const auto& p : f.nodes)
        for (double x : p.c)
          if (!std::isfinite(x)) return true;
      return false;
    };
    if (bad(u_) || (s_.scheme == Scheme::fot && bad(v_))) {
      std::ostringstream msg;
      msg << "non-finite DOF at step " << n_ << " (t = " << time() << ")";
      throw Instability(msg.str(), n_);
    }
  }
};

}  // namespace hermite
