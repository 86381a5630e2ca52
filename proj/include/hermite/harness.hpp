#pragma once

// Experiment drivers: run configuration, convergence and long-time studies,
// conditioning, solvability and symmetry tables, CSV output.

#include "hermite/cbc.hpp"
#include "hermite/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermite {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything one simulation or study needs. Unset optionals take scheme/m-dependent defaults.
struct RunConfig {
  Scheme scheme = Scheme::sot;
  int m = 1;
  std::string mapping = "identity";
  std::map<std::string, double> mapping_params;  // alpha, beta, a, r0, ra, rb
  int N1 = 20, N2 = 20;
  std::array<Bc, 4> bc{Bc::dirichlet, Bc::dirichlet, Bc::dirichlet, Bc::dirichlet};
  std::string solution = "sine";
  std::optional<double> kx, ky;
  std::optional<int> ntheta, nr;
  double c = 1.0;
  std::optional<double> cfl;
  double t_final = 0.5;
  int smoothing = 0;
  bool zero_data = false;
  std::vector<int> grids{10, 20, 40};  // N1 values for converge; N2 follows N1 * (N2/N1)
  int sample_every = 10;
  std::string output;

  double cfl_value() const { return cfl ? *cfl : (scheme == Scheme::fot ? 0.5 : 0.4); }
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

inline double to_double(const std::string& key, const std::string& v)
{
  double x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

inline int to_int(const std::string& key, const std::string& v)
{
  int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline Bc parse_bc(const std::string& key, const std::string& v)
{
  const std::string t = lower(v);
  if (t == "d" || t == "dirichlet") return Bc::dirichlet;
  if (t == "n" || t == "neumann") return Bc::neumann;
  if (t == "p" || t == "periodic") return Bc::periodic;
  throw ConfigError("config: '" + key + "' expects D, N or P, got '" + v + "'");
}

inline bool to_bool(const std::string& key, const std::string& v)
{
  const std::string t = lower(v);
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace detail

/// Apply one key = value setting.
inline void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in)
{
  using namespace detail;
  const std::string key = lower(trim(key_in)), v = trim(value_in);
  if (v.empty()) throw ConfigError("config: empty value for '" + key + "'");
  if (key == "scheme") {
    const std::string s = lower(v);
    if (s == "fot")
      cfg.scheme = Scheme::fot;
    else if (s == "sot")
      cfg.scheme = Scheme::sot;
    else
      throw ConfigError("config: scheme must be FOT or SOT, got '" + v + "'");
  } else if (key == "m") {
    cfg.m = to_int(key, v);
  } else if (key == "mapping") {
    cfg.mapping = lower(v);
  } else if (key.rfind("mapping.", 0) == 0) {
    cfg.mapping_params[key.substr(8)] = to_double(key, v);
  } else if (key == "n") {
    cfg.N1 = cfg.N2 = to_int(key, v);
  } else if (key == "n1") {
    cfg.N1 = to_int(key, v);
  } else if (key == "n2") {
    cfg.N2 = to_int(key, v);
  } else if (key == "bc") {
    const auto parts = split(v, ',');
    if (parts.size() == 1)
      cfg.bc.fill(parse_bc(key, parts[0]));
    else if (parts.size() == 4)
      for (std::size_t k = 0; k < 4; ++k) cfg.bc[k] = parse_bc(key, parts[k]);
    else
      throw ConfigError("config: bc takes one type or four (r=0, r=1, s=0, s=1)");
  } else if (key == "bc.r0" || key == "bc.r1" || key == "bc.s0" || key == "bc.s1") {
    const std::size_t k = (key[3] == 'r' ? 0u : 2u) + (key[4] == '1' ? 1u : 0u);
    cfg.bc[k] = parse_bc(key, v);
  } else if (key == "solution") {
    cfg.solution = lower(v);
  } else if (key == "kx") {
    cfg.kx = to_double(key, v);
  } else if (key == "ky") {
    cfg.ky = to_double(key, v);
  } else if (key == "ntheta") {
    cfg.ntheta = to_int(key, v);
  } else if (key == "nr") {
    cfg.nr = to_int(key, v);
  } else if (key == "c") {
    cfg.c = to_double(key, v);
  } else if (key == "cfl") {
    cfg.cfl = to_double(key, v);
  } else if (key == "t_final") {
    cfg.t_final = to_double(key, v);
  } else if (key == "smoothing" || key == "ns") {
    cfg.smoothing = to_int(key, v);
  } else if (key == "zero_data") {
    cfg.zero_data = to_bool(key, v);
  } else if (key == "grids") {
    cfg.grids.clear();
    for (const auto& p : split(v, ',')) cfg.grids.push_back(to_int(key, p));
  } else if (key == "sample_every") {
    cfg.sample_every = to_int(key, v);
  } else if (key == "output") {
    cfg.output = v;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

/// Parse "key = value" lines; '#' starts a comment.
inline void apply_text(RunConfig& cfg, std::istream& in, const std::string& source = "config")
{
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  apply_text(cfg, in, path);
  return cfg;
}

/// Override from "key=value".
inline void apply_override(RunConfig& cfg, const std::string& kv)
{
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
  apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

inline Mapping make_mapping(const RunConfig& cfg)
{
  auto p = [&](const char* k, double def) {
    const auto it = cfg.mapping_params.find(k);
    return it == cfg.mapping_params.end() ? def : it->second;
  };
  if (cfg.mapping == "identity") return Mapping::identity();
  if (cfg.mapping == "polynomial") return Mapping::polynomial(p("alpha", 0.5));
  if (cfg.mapping == "tanh") return Mapping::tanh(p("a", -0.15), p("beta", 5.0), p("r0", 0.5));
  if (cfg.mapping == "rhombus") return Mapping::rhombus(p("alpha", 0.1), p("beta", 0.1));
  if (cfg.mapping == "xmap" || cfg.mapping == "x") return Mapping::xmap(p("beta", 0.2));
  if (cfg.mapping == "annulus") return Mapping::annulus(p("ra", 0.5), p("rb", 1.0));
  throw ConfigError("config: unknown mapping '" + cfg.mapping + "'");
}

inline ExactSolution make_solution(const RunConfig& cfg, const Mapping& g)
{
  const double k = std::pow(2.0, cfg.m - 1);
  if (cfg.solution == "sine") return ExactSolution::sine(cfg.kx.value_or(k), cfg.ky.value_or(k), cfg.c);
  if (cfg.solution == "square_eig") {
    const double kx = cfg.kx.value_or(k), ky = cfg.ky.value_or(k);
    if (kx != std::round(kx) || ky != std::round(ky) || kx < 1 || ky < 1)
      throw ConfigError("config: square_eig needs positive integer kx, ky");
    return ExactSolution::square_eig(static_cast<int>(kx), static_cast<int>(ky), cfg.c);
  }
  if (cfg.solution == "annulus_eig") {
    const int nt = cfg.ntheta.value_or(1 << cfg.m), nr = cfg.nr.value_or(1 << (cfg.m - 1));
    if (nt < 0 || nr < 1) throw ConfigError("config: annulus_eig needs ntheta >= 0 and nr >= 1");
    return ExactSolution::annulus_eig(nt, nr, g.ra, g.rb, cfg.c);
  }
  throw ConfigError("config: unknown solution '" + cfg.solution + "'");
}

/// Validated solver setup; throws ConfigError with the offending field.
inline SolverSetup make_setup(const RunConfig& cfg)
{
  if (cfg.m < 1 || cfg.m > 5) throw ConfigError("config: m must be in 1..5");
  if (!(cfg.c > 0)) throw ConfigError("config: c must be positive");
  if (cfg.sample_every < 1) throw ConfigError("config: sample_every must be >= 1");
  SolverSetup s;
  s.scheme = cfg.scheme;
  s.m = cfg.m;
  s.mapping = make_mapping(cfg);
  s.N1 = cfg.N1;
  s.N2 = cfg.N2;
  s.bc = cfg.bc;
  s.solution = make_solution(cfg, s.mapping);
  s.cfl = cfg.cfl_value();
  s.t_final = cfg.t_final;
  s.smoothing = cfg.smoothing;
  s.zero_data = cfg.zero_data;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return s;
}

inline std::string bc_string(const std::array<Bc, 4>& bc)
{
  if (bc[0] == bc[1] && bc[1] == bc[2] && bc[2] == bc[3]) return to_string(bc[0]);
  return to_string(bc[0]) + to_string(bc[1]) + to_string(bc[2]) + to_string(bc[3]);
}

/// Shortest round-trip decimal.
inline std::string fmt(double x)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct TracePoint {
  int step = 0;
  double t = 0;
  double rel_error = 0;
};

struct RunReport {
  double dt = 0;
  int steps = 0;
  double error = 0;
  std::vector<TracePoint> trace;
  std::vector<double> error_field;
  int n1 = 0, n2 = 0;
};

/// Single simulation to t_final; samples the error every sample_every steps.
inline RunReport run(const RunConfig& cfg)
{
  Solver sv(make_setup(cfg));
  RunReport rep;
  rep.dt = sv.dt();
  rep.steps = sv.steps();
  rep.trace.push_back({0, 0.0, sv.error()});
  while (sv.step_index() < sv.steps()) {
    sv.step();
    if (sv.step_index() % cfg.sample_every == 0 || sv.step_index() == sv.steps())
      rep.trace.push_back({sv.step_index(), sv.time(), sv.error()});
  }
  rep.error = sv.error();
  rep.error_field = sv.error_field();
  rep.n1 = sv.u().n1;
  rep.n2 = sv.u().n2;
  return rep;
}

/// Least-squares slope of -log2(error) against log2(N) over the finest three grids
/// whose errors are at least 1e-12. NaN when fewer than two points remain.
inline double convergence_slope(const std::vector<int>& N, const std::vector<double>& err)
{
  std::vector<std::pair<int, double>> pts;
  for (std::size_t k = 0; k < N.size(); ++k) pts.emplace_back(N[k], err[k]);
  std::sort(pts.begin(), pts.end());
  if (pts.size() > 3) pts.erase(pts.begin(), pts.end() - 3);
  std::vector<double> x, y;
  for (const auto& [n, e] : pts)
    if (e >= 1e-12 && std::isfinite(e)) {
      x.push_back(std::log2(static_cast<double>(n)));
      y.push_back(-std::log2(e));
    }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergeRow {
  int N1 = 0, N2 = 0;
  double dt = 0, error = 0;
};

struct ConvergeReport {
  RunConfig cfg;
  std::vector<ConvergeRow> rows;
  double slope = 0;
};

/// Runs every grid in cfg.grids (N1 = grid, N2 scaled by the configured N2/N1 ratio).
inline ConvergeReport converge(const RunConfig& cfg)
{
  if (cfg.grids.size() < 3) throw ConfigError("converge: need at least three grids");
  ConvergeReport rep;
  rep.cfg = cfg;
  std::vector<int> Ns;
  std::vector<double> es;
  for (int N : cfg.grids) {
    RunConfig c = cfg;
    c.N1 = N;
    c.N2 = static_cast<int>(std::lround(static_cast<double>(N) * cfg.N2 / cfg.N1));
    Solver sv(make_setup(c));
    sv.run();
    rep.rows.push_back({c.N1, c.N2, sv.dt(), sv.error()});
    Ns.push_back(N);
    es.push_back(sv.error());
  }
  rep.slope = convergence_slope(Ns, es);
  return rep;
}

inline void write_converge_csv(std::ostream& os, const std::vector<ConvergeReport>& reps, bool header = true)
{
  if (header) os << "scheme,m,mapping,bc,N1,N2,dt,error,slope\n";
  for (const auto& r : reps)
    for (const auto& row : r.rows)
      os << to_string(r.cfg.scheme) << ',' << r.cfg.m << ',' << r.cfg.mapping << ',' << bc_string(r.cfg.bc) << ','
         << row.N1 << ',' << row.N2 << ',' << fmt(row.dt) << ',' << fmt(row.error) << ',' << fmt(r.slope) << '\n';
}

struct LongtimeReport {
  std::vector<TracePoint> trace;
  double error_at_one = 0;  // last sample with t <= 1
  double max_error = 0;
  bool bounded(double factor = 10.0) const { return max_error <= factor * error_at_one; }
};

/// Long run with the error sampled every sample_every steps.
inline LongtimeReport longtime(const RunConfig& cfg)
{
  const RunReport r = run(cfg);
  LongtimeReport lt;
  lt.trace = r.trace;
  for (const auto& p : r.trace) {
    if (p.step == 0) continue;
    if (p.t <= 1.0 + 1e-12) lt.error_at_one = p.rel_error;
    lt.max_error = std::max(lt.max_error, p.rel_error);
  }
  return lt;
}

inline void write_longtime_csv(std::ostream& os, const std::vector<TracePoint>& trace)
{
  os << "step,t,rel_error\n";
  for (const auto& p : trace) os << p.step << ',' << fmt(p.t) << ',' << fmt(p.rel_error) << '\n';
}

struct CondRow {
  std::string bc;
  int m = 1;
  double gamma = 1;
  Scaling scaling = Scaling::rowscale;
  double kappa = 0;
};

/// Cartesian CBC condition numbers for faces (D, N) and corners (DD, NN, DN).
inline std::vector<CondRow> cond_study(const std::vector<int>& ms, const std::vector<double>& gammas,
                                       const std::vector<std::string>& kinds,
                                       const std::vector<Scaling>& scalings = {Scaling::rowscale})
{
  std::vector<CondRow> out;
  for (const auto& kind : kinds) {
    Bc a;
    std::optional<Bc> b;
    if (kind == "D")
      a = Bc::dirichlet;
    else if (kind == "N")
      a = Bc::neumann;
    else if (kind == "DD")
      a = Bc::dirichlet, b = Bc::dirichlet;
    else if (kind == "NN")
      a = Bc::neumann, b = Bc::neumann;
    else if (kind == "DN")
      a = Bc::dirichlet, b = Bc::neumann;
    else
      throw ConfigError("cond: unknown bc kind '" + kind + "' (D, N, DD, NN, DN)");
    for (int m : ms)
      for (double g : gammas)
        for (Scaling s : scalings)
          out.push_back({kind, m, g, s, condition_number_inf(cartesian_system(m, a, b, g), s)});
  }
  return out;
}

inline void write_cond_csv(std::ostream& os, const std::vector<CondRow>& rows)
{
  os << "bc,m,gamma,scaling,kappa_inf\n";
  for (const auto& r : rows)
    os << r.bc << ',' << r.m << ',' << fmt(r.gamma) << ',' << to_string(r.scaling) << ',' << fmt(r.kappa) << '\n';
}

struct CurvCondRow {
  std::string mapping, bc;
  int m = 1, N = 0;
  double kappa_face = 0, kappa_corner = 0;
};

/// Row-scaled condition numbers on a mapped grid: left-face midpoint node and the (0,0) corner.
inline std::vector<CurvCondRow> curvilinear_cond(const std::string& mapping, const std::vector<int>& ms,
                                                 const std::vector<int>& Ns, Bc bc)
{
  RunConfig cfg;
  cfg.mapping = mapping;
  const Mapping g = make_mapping(cfg);
  if (g.periodic_s()) throw ConfigError("cond: curvilinear study needs a non-periodic mapping");
  std::vector<CurvCondRow> out;
  for (int m : ms)
    for (int N : Ns) {
      const GridSpec spec{N, N};
      const FaceBc fr{Axis::r, 0, bc}, fs{Axis::s, 0, bc};
      const std::array<FaceTag, 2> tags{FaceTag{Axis::r, 0}, FaceTag{Axis::s, 0}};
      const std::array<FaceBc, 2> both{fr, fs};
      const MetricSet mf = metric_polys(g, {0.0, (N / 2) * spec.ds()}, spec.spacings(), 1.0, m, {tags.data(), 1});
      const MetricSet mc = metric_polys(g, {0.0, 0.0}, spec.spacings(), 1.0, m, tags);
      const CbcSystem face = assemble_face(curvilinear_operators(mf, m, {&fr, 1}), fr, m);
      const CbcSystem corner = assemble_corner(curvilinear_operators(mc, m, both), fr, fs, m);
      out.push_back({mapping, to_string(bc), m, N, condition_number_inf(face), condition_number_inf(corner)});
    }
  return out;
}

inline void write_curv_cond_csv(std::ostream& os, const std::vector<CurvCondRow>& rows)
{
  os << "mapping,bc,m,N,kappa_face,kappa_corner\n";
  for (const auto& r : rows)
    os << r.mapping << ',' << r.bc << ',' << r.m << ',' << r.N << ',' << fmt(r.kappa_face) << ','
       << fmt(r.kappa_corner) << '\n';
}

struct DetRow {
  std::string bc;
  int m = 1;
  double xi = 0, sigma_min = 0, det_ratio = 0;
};

/// Samples of the frozen-coefficient left-face probe on [0, xi_hi].
inline std::vector<DetRow> det_samples(int m, Bc bc, double xi_hi, int samples)
{
  std::vector<DetRow> out;
  const double dr = 0.1;
  for (int k = 0; k <= samples; ++k) {
    const double xi = xi_hi * k / samples;
    const DetProbe p = det_probe(m, bc, 1.0, 1.0, 0.0, 2.0 * xi / dr, 0.0, dr, 0.1);
    out.push_back({to_string(bc), m, xi, p.min_singular_value, p.det_ratio});
  }
  return out;
}

inline void write_det_csv(std::ostream& os, const std::vector<DetRow>& rows)
{
  os << "bc,m,xi,sigma_min,det_ratio\n";
  for (const auto& r : rows)
    os << r.bc << ',' << r.m << ',' << fmt(r.xi) << ',' << fmt(r.sigma_min) << ',' << fmt(r.det_ratio) << '\n';
}

struct CflProbe {
  double stable = 0, unstable = 0;  // bracketing CFL values
  std::vector<std::pair<double, bool>> tried;
};

/// Bisects the CFL number between a stable lo and an unstable hi. A run is stable when it
/// finishes without non-finite values and its final error stays below `bound`.
inline CflProbe cfl_probe(RunConfig cfg, double lo, double hi, int iters, double bound = 1.0)
{
  if (!(lo > 0 && hi > lo)) throw ConfigError("cflprobe: need 0 < lo < hi");
  auto stable = [&](double cfl) {
    cfg.cfl = cfl;
    try {
      Solver sv(make_setup(cfg));
      sv.run();
      return sv.error() < bound;
    } catch (const Instability&) {
      return false;
    }
  };
  CflProbe p;
  p.stable = lo;
  p.unstable = hi;
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (p.stable + p.unstable);
    const bool ok = stable(mid);
    p.tried.emplace_back(mid, ok);
    (ok ? p.stable : p.unstable) = mid;
  }
  return p;
}

}  // namespace hermite
