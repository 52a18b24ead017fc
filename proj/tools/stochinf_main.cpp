#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochinf/errors.hpp"
#include "stochinf/hinf.hpp"
#include "stochinf/io.hpp"
#include "stochinf/problems.hpp"

namespace si = stochinf;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void configure_threads() {
  if (const char* env = std::getenv("STOCHINF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) {
      Eigen::setNbThreads(static_cast<int>(v));
    } else {
      std::cerr << "warning: ignoring invalid STOCHINF_THREADS='" << env
                << "'\n";
    }
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

double parse_d(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(ctx + ": bad number '" + s + "'");
  }
}

long long parse_ll(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(ctx + ": bad integer '" + s + "'");
  }
}

// Generator grammar shared by --gen and the gen subcommand:
//   heat:K  |  random:N,M,P,SEED  |  scalar:A,N1,B,C
si::StochasticSystem system_from_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::vector<std::string> args =
      colon == std::string::npos ? std::vector<std::string>{}
                                 : split(spec.substr(colon + 1), ',');
  if (kind == "heat") {
    if (args.size() != 1) {
      throw std::runtime_error("spec '" + spec + "': expected heat:K");
    }
    return si::heat_system(static_cast<int>(parse_ll(args[0], spec)));
  }
  if (kind == "random") {
    if (args.size() != 4) {
      throw std::runtime_error("spec '" + spec +
                               "': expected random:N,M,P,SEED");
    }
    return si::random_system(static_cast<int>(parse_ll(args[0], spec)),
                             static_cast<int>(parse_ll(args[1], spec)),
                             static_cast<int>(parse_ll(args[2], spec)),
                             static_cast<std::uint64_t>(
                                 parse_ll(args[3], spec)));
  }
  if (kind == "scalar") {
    if (args.size() != 4) {
      throw std::runtime_error("spec '" + spec +
                               "': expected scalar:A,N1,B,C");
    }
    si::Matrix A(1, 1), N(1, 1), B(1, 1), C(1, 1);
    A << parse_d(args[0], spec);
    N << parse_d(args[1], spec);
    B << parse_d(args[2], spec);
    C << parse_d(args[3], spec);
    return si::StochasticSystem(A, N, B, C, si::Matrix::Zero(1, 1));
  }
  throw std::runtime_error("spec '" + spec +
                           "': unknown kind (heat, random, scalar)");
}

struct InputArgs {
  std::string manifest;
  std::string gen;

  void attach(CLI::App* cmd) {
    cmd->add_option("manifest", manifest, "system manifest (JSON)");
    cmd->add_option("--gen", gen,
                    "generate the system instead: heat:K, "
                    "random:N,M,P,SEED or scalar:A,N1,B,C");
  }

  // Returns the system plus a display name.
  si::StochasticSystem resolve(std::string* name) const {
    if (manifest.empty() == gen.empty()) {
      throw std::runtime_error(
          "give exactly one of a manifest path or --gen SPEC");
    }
    if (!gen.empty()) {
      *name = gen;
      return system_from_spec(gen);
    }
    si::SystemManifest mf = si::load_manifest(manifest);
    *name = mf.name.empty() ? manifest : mf.name;
    return std::move(mf.system);
  }
};

struct NewtonArgs {
  int kmax = 50;
  double newton_tol = 1e-10;
  bool bound_checks = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kmax", kmax, "Newton iteration cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--newton-tol", newton_tol, "Newton residual tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--bound-checks", bound_checks,
                  "enable the trace-bound test on Newton iterates");
  }

  si::NewtonOptions options() const {
    si::NewtonOptions o;
    o.kmax = kmax;
    o.tol = newton_tol;
    o.bound_checks = bound_checks;
    return o;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

void print_system_line(std::ostream& os, const std::string& name,
                       const si::StochasticSystem& sys) {
  os << "system: " << name << "  (n = " << sys.n() << ", m = " << sys.m()
     << ", p = " << sys.p() << ", noise terms = " << sys.noise_count()
     << ")\n";
}

int total_newton_iters(const si::NormReport& rep) {
  int total = 0;
  for (const auto& e : rep.bracket_history) total += e.newton_iters;
  return total;
}

int cmd_norm(const InputArgs& in, const NewtonArgs& na, double tol,
             const std::string& json_path) {
  std::string name;
  const si::StochasticSystem sys = in.resolve(&name);
  si::HinfOptions opts;
  opts.tol = tol;
  opts.newton = na.options();
  const si::NormReport rep = si::stoch_hinf_norm(sys, opts);

  print_system_line(std::cout, name, sys);
  char line[160];
  std::snprintf(line, sizeof(line), "norm      = %.6f\n", rep.norm);
  std::cout << line;
  std::snprintf(line, sizeof(line),
                "interval  = [%.6f, %.6f]  (tol %g)\n", rep.gamma_lo,
                rep.gamma_hi, rep.tol);
  std::cout << line;
  std::snprintf(line, sizeof(line), "det_hinf  = %.6f\n", rep.det_hinf);
  std::cout << line;
  const auto it = rep.timings.find("total_s");
  std::snprintf(line, sizeof(line),
                "gamma evaluations = %zu, newton iterations = %d, "
                "time = %.3f s\n",
                rep.bracket_history.size(), total_newton_iters(rep),
                it == rep.timings.end() ? 0.0 : it->second);
  std::cout << line;

  if (!json_path.empty()) {
    if (json_path == "-") {
      std::cout << si::report_json(rep) << "\n";
    } else {
      open_out(json_path) << si::report_json(rep) << "\n";
    }
  }
  return 0;
}

int cmd_stability(const InputArgs& in) {
  std::string name;
  const si::StochasticSystem sys = in.resolve(&name);
  const si::MsVerdict v = si::ms_stability(sys.A, sys.Nx);

  print_system_line(std::cout, name, sys);
  std::cout << "spectral_abscissa = " << v.abscissa << "\n";
  if (v.abscissa < 0.0) {
    std::cout << "rho_estimate      = " << v.rho
              << (v.rho_converged ? "" : "  (power iteration not converged)")
              << "  [" << v.power_iterations << " iterations]\n";
  } else {
    std::cout << "rho_estimate      = n/a (drift not Hurwitz)\n";
  }
  if (sys.n() * sys.n() <= si::kKronGuard) {
    std::cout << "oracle            = "
              << (si::ms_stable_oracle(sys.A, sys.Nx) ? "stable" : "unstable")
              << "\n";
  }
  std::cout << "verdict           = "
            << (v.stable ? "ms-stable" : "not ms-stable") << "\n";
  return v.stable ? 0 : 2;
}

int cmd_profile(const InputArgs& in, const NewtonArgs& na, double tol,
                double gmin, double gmax, int points,
                const std::string& out_path) {
  std::string name;
  const si::StochasticSystem sys = in.resolve(&name);
  std::vector<double> grid;
  if (gmin > 0.0 && gmax > 0.0) {
    if (gmax <= gmin) {
      throw std::runtime_error("--gamma-max must exceed --gamma-min");
    }
    grid.resize(points);
    for (int i = 0; i < points; ++i) {
      grid[i] = gmin + (gmax - gmin) * i / (points - 1);
    }
  } else {
    si::HinfOptions opts;
    opts.tol = tol;
    opts.newton = na.options();
    const si::NormReport rep = si::stoch_hinf_norm(sys, opts);
    grid = si::default_profile_grid(rep.norm, points);
  }
  const std::vector<si::ProfilePoint> pts =
      si::profile(sys, grid, na.options());

  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& os = out_path.empty() ? std::cout : file;
  os << "gamma,rho,alpha,status\n";
  char line[160];
  for (const auto& pt : pts) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%s\n", pt.gamma,
                  pt.rho, pt.alpha, si::to_string(pt.status));
    os << line;
  }
  return 0;
}

int cmd_gen(const std::string& spec_pos, int heat_k,
            const std::string& random_args, const std::string& out_path,
            bool inline_arrays) {
  std::string spec = spec_pos;
  int given = spec.empty() ? 0 : 1;
  if (heat_k > 0) {
    ++given;
    spec = "heat:" + std::to_string(heat_k);
  }
  if (!random_args.empty()) {
    ++given;
    spec = "random:" + random_args;
  }
  if (given != 1) {
    throw std::runtime_error(
        "give exactly one of SPEC, --heat K or --random N,M,P,SEED");
  }
  const si::StochasticSystem sys = system_from_spec(spec);
  si::save_manifest(out_path, sys, spec, "stochinf gen " + spec,
                    inline_arrays);
  std::cout << "wrote " << out_path << "  (" << spec << ")\n";
  return 0;
}

int cmd_bench(double tol, bool quick, const std::string& out_path) {
  struct Case {
    std::string name;
    si::StochasticSystem sys;
  };
  std::vector<Case> cases;
  const int heat_max = quick ? 6 : 10;
  for (int k = 5; k <= heat_max; ++k) {
    cases.push_back({"heat:" + std::to_string(k), si::heat_system(k)});
  }
  const std::vector<int> sizes = quick ? std::vector<int>{10}
                                       : std::vector<int>{10, 20, 40};
  for (int n : sizes) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(n);
    cases.push_back({"random:" + std::to_string(n) + ",2,2," +
                         std::to_string(seed),
                     si::random_system(n, 2, 2, seed)});
  }

  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& os = out_path.empty() ? std::cout : file;
  os << "case,n,norm,gamma_evals,newton_iters,wall_s\n";
  si::HinfOptions opts;
  opts.tol = tol;
  char line[200];
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const si::NormReport rep = si::stoch_hinf_norm(c.sys, opts);
    const double wall = seconds_since(t0);
    // Random case names are pasteable generator specs and contain commas,
    // so quote them per RFC 4180 instead of inventing a second spelling.
    const std::string name = c.name.find(',') == std::string::npos
                                 ? c.name
                                 : "\"" + c.name + "\"";
    std::snprintf(line, sizeof(line), "%s,%lld,%.6f,%zu,%d,%.3f\n",
                  name.c_str(), static_cast<long long>(c.sys.n()), rep.norm,
                  rep.bracket_history.size(), total_newton_iters(rep), wall);
    os << line;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads();

  CLI::App app{"stochastic H-infinity norm of linear systems with "
               "multiplicative white noise"};
  app.require_subcommand(1);

  InputArgs norm_in, stab_in, prof_in;
  NewtonArgs norm_newton, prof_newton;
  double norm_tol = 1e-4;
  std::string norm_json;
  CLI::App* norm = app.add_subcommand(
      "norm", "compute the stochastic H-infinity norm");
  norm_in.attach(norm);
  norm_newton.attach(norm);
  norm->add_option("--tol", norm_tol, "relative bisection tolerance")
      ->check(CLI::PositiveNumber);
  norm->add_option("--json", norm_json,
                   "write the full report as JSON ('-' for stdout)");

  CLI::App* stab = app.add_subcommand(
      "stability", "mean-square stability test (exit 2 when unstable)");
  stab_in.attach(stab);

  double prof_tol = 1e-4, prof_gmin = 0.0, prof_gmax = 0.0;
  int prof_points = 50;
  std::string prof_out;
  CLI::App* prof = app.add_subcommand(
      "profile", "rho and alpha of the stabilizing solution over a gamma grid");
  prof_in.attach(prof);
  prof_newton.attach(prof);
  auto* gmin_opt =
      prof->add_option("--gamma-min", prof_gmin, "grid start (default: "
                       "1.1 x norm, which is then computed first)");
  auto* gmax_opt = prof->add_option("--gamma-max", prof_gmax,
                                    "grid end (default: 6 x norm)");
  gmin_opt->needs(gmax_opt);
  gmax_opt->needs(gmin_opt);
  prof->add_option("--points", prof_points, "grid size")
      ->check(CLI::Range(2, 100000));
  prof->add_option("--tol", prof_tol,
                   "norm tolerance for the automatic grid");
  prof->add_option("--out", prof_out, "CSV output file (default stdout)");

  std::string gen_spec, gen_random, gen_out;
  int gen_heat = 0;
  bool gen_inline = false;
  CLI::App* gen = app.add_subcommand(
      "gen", "write a system as a manifest plus MatrixMarket files");
  gen->add_option("spec", gen_spec,
                  "heat:K, random:N,M,P,SEED or scalar:A,N1,B,C");
  gen->add_option("--heat", gen_heat, "heat system with a K x K grid");
  gen->add_option("--random", gen_random, "random system N,M,P,SEED");
  gen->add_option("--out", gen_out, "manifest path to write")->required();
  gen->add_flag("--inline", gen_inline,
                "store matrices inside the JSON instead of .mtx files");

  double bench_tol = 1e-4;
  bool bench_quick = false;
  std::string bench_out;
  CLI::App* bench = app.add_subcommand(
      "bench", "norms and wall times for the built-in example family");
  bench->add_option("--tol", bench_tol, "bisection tolerance");
  bench->add_flag("--quick", bench_quick, "small subset of the cases");
  bench->add_option("--out", bench_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (norm->parsed()) {
      return cmd_norm(norm_in, norm_newton, norm_tol, norm_json);
    }
    if (stab->parsed()) return cmd_stability(stab_in);
    if (prof->parsed()) {
      return cmd_profile(prof_in, prof_newton, prof_tol, prof_gmin, prof_gmax,
                         prof_points, prof_out);
    }
    if (gen->parsed()) {
      return cmd_gen(gen_spec, gen_heat, gen_random, gen_out, gen_inline);
    }
    if (bench->parsed()) return cmd_bench(bench_tol, bench_quick, bench_out);
  } catch (const si::MSUnstable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const si::BracketFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
