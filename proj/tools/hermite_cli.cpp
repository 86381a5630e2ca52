// Command-line front end for the Hermite wave solver and its studies.

#include "hermite/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

using namespace hermite;

namespace {

constexpr int exit_instability = 2;
constexpr int exit_config = 3;

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path)
  {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    os = &file;
  }
};

RunConfig gather(const std::string& path, const std::vector<std::string>& sets)
{
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  return cfg;
}

std::vector<Bc> face_types(const std::vector<std::string>& names)
{
  std::vector<Bc> out;
  for (const auto& n : names) {
    if (n == "D") out.push_back(Bc::dirichlet);
    else if (n == "N") out.push_back(Bc::neumann);
    else throw ConfigError("expected D or N, got '" + n + "'");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Hermite solver for the 2-D wave equation on mapped grids"};
  app.require_subcommand(1);

  std::string config, out, json_out;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "key = value configuration file");
    sub->add_option("-s,--set", sets, "override, key=value (repeatable)");
    sub->add_option("-o,--out", out, "CSV output path (default stdout)");
  };

  auto* run_cmd = app.add_subcommand("run", "one simulation; prints the final error");
  add_common(run_cmd);
  run_cmd->add_option("--json", json_out, "write a JSON summary");

  auto* conv_cmd = app.add_subcommand("converge", "grid convergence study over `grids`");
  add_common(conv_cmd);

  auto* long_cmd = app.add_subcommand("longtime", "long run with a sampled error trace");
  add_common(long_cmd);

  std::vector<int> ms{1, 2, 3, 4, 5};
  std::vector<double> gammas{1.0};
  std::vector<std::string> kinds{"D", "N", "DD", "NN", "DN"}, scalings{"rowscale"};
  std::string curv_map;
  std::vector<int> curv_N{10, 20, 40, 80};
  auto* cond_cmd = app.add_subcommand("cond", "CBC condition numbers");
  cond_cmd->add_option("-m", ms, "degrees")->delimiter(',');
  cond_cmd->add_option("--gamma", gammas, "cell ratios dx/dy")->delimiter(',');
  cond_cmd->add_option("--bc", kinds, "D, N, DD, NN, DN")->delimiter(',');
  cond_cmd->add_option("--scaling", scalings, "rowscale, equilibrate")->delimiter(',');
  cond_cmd->add_option("--mapping", curv_map, "mapped-grid study (face and corner nodes)");
  cond_cmd->add_option("--grids", curv_N, "grid sizes for --mapping")->delimiter(',');
  cond_cmd->add_option("-o,--out", out, "CSV output path");

  double xi_hi = 6.0;
  int samples = 600;
  std::vector<std::string> faces{"D", "N"};
  auto* det_cmd = app.add_subcommand("detsweep", "frozen-coefficient solvability sweep in xi");
  det_cmd->add_option("-m", ms, "degrees")->delimiter(',');
  det_cmd->add_option("--bc", faces, "D, N")->delimiter(',');
  det_cmd->add_option("--xi-max", xi_hi, "upper end of the sweep");
  det_cmd->add_option("--samples", samples, "samples per sweep");
  det_cmd->add_option("-o,--out", out, "CSV of samples");

  auto* sym_cmd = app.add_subcommand("symcheck", "parity of homogeneous CBC solves");
  sym_cmd->add_option("-m", ms, "degrees")->delimiter(',');
  sym_cmd->add_option("-o,--out", out, "CSV output path");

  double lo = 0.1, hi = 1.5;
  int iters = 6;
  auto* cfl_cmd = app.add_subcommand("cflprobe", "bisect the largest stable CFL number (experimental)");
  add_common(cfl_cmd);
  cfl_cmd->add_option("--lo", lo, "a stable CFL number");
  cfl_cmd->add_option("--hi", hi, "an unstable CFL number");
  cfl_cmd->add_option("--iters", iters, "bisection steps");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const RunConfig cfg = gather(config, sets);
      const RunReport r = run(cfg);
      Output o(out);
      write_longtime_csv(*o.os, r.trace);
      std::cerr << "error " << fmt(r.error) << " after " << r.steps << " steps, dt " << fmt(r.dt) << "\n";
      if (!json_out.empty()) {
        nlohmann::json j;
        j["scheme"] = to_string(cfg.scheme);
        j["m"] = cfg.m;
        j["mapping"] = cfg.mapping;
        j["bc"] = bc_string(cfg.bc);
        j["N1"] = cfg.N1;
        j["N2"] = cfg.N2;
        j["dt"] = r.dt;
        j["steps"] = r.steps;
        j["t_final"] = cfg.t_final;
        j["error"] = r.error;
        std::ofstream js(json_out);
        if (!js) throw ConfigError("cannot open '" + json_out + "'");
        js << j.dump(2) << "\n";
      }
    } else if (conv_cmd->parsed()) {
      const ConvergeReport r = converge(gather(config, sets));
      Output o(out);
      write_converge_csv(*o.os, {r});
    } else if (long_cmd->parsed()) {
      const LongtimeReport r = longtime(gather(config, sets));
      Output o(out);
      write_longtime_csv(*o.os, r.trace);
      std::cerr << "max error " << fmt(r.max_error) << ", at t<=1 " << fmt(r.error_at_one)
                << (r.bounded() ? " (bounded)" : " (grew more than 10x)") << "\n";
    } else if (cond_cmd->parsed()) {
      Output o(out);
      if (!curv_map.empty()) {
        std::vector<CurvCondRow> rows;
        for (Bc b : face_types(kinds.size() == 5 ? std::vector<std::string>{"D", "N"} : kinds)) {
          auto r = curvilinear_cond(curv_map, ms, curv_N, b);
          rows.insert(rows.end(), r.begin(), r.end());
        }
        write_curv_cond_csv(*o.os, rows);
      } else {
        std::vector<Scaling> sc;
        for (const auto& s : scalings) {
          if (s == "rowscale") sc.push_back(Scaling::rowscale);
          else if (s == "equilibrate") sc.push_back(Scaling::equilibrate);
          else throw ConfigError("unknown scaling '" + s + "'");
        }
        write_cond_csv(*o.os, cond_study(ms, gammas, kinds, sc));
      }
    } else if (det_cmd->parsed()) {
      if (!(xi_hi > 0) || samples < 2) throw ConfigError("detsweep: need xi-max > 0 and samples >= 2");
      std::vector<DetRow> rows;
      for (Bc b : face_types(faces))
        for (int m : ms) {
          auto r = det_samples(m, b, xi_hi, samples);
          rows.insert(rows.end(), r.begin(), r.end());
          std::cerr << to_string(b) << " m=" << m << " xi_max " << fmt(det_sweep(m, b, xi_hi, samples)) << "\n";
        }
      Output o(out);
      write_det_csv(*o.os, rows);
    } else if (sym_cmd->parsed()) {
      Output o(out);
      *o.os << "m,bc,violation\n";
      for (int m : ms)
        for (Bc b : {Bc::dirichlet, Bc::neumann}) *o.os << m << ',' << to_string(b) << ',' << fmt(symmetry_check(m, b)) << '\n';
    } else if (cfl_cmd->parsed()) {
      const CflProbe p = cfl_probe(gather(config, sets), lo, hi, iters);
      Output o(out);
      *o.os << "cfl,stable\n";
      for (const auto& [c, ok] : p.tried) *o.os << fmt(c) << ',' << (ok ? 1 : 0) << '\n';
      std::cerr << "stable up to " << fmt(p.stable) << ", unstable at " << fmt(p.unstable) << "\n";
    }
  } catch (const Instability& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return exit_instability;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }
  return 0;
}
