#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stochinf/errors.hpp"
#include "stochinf/hinf.hpp"
#include "stochinf/io.hpp"
#include "stochinf/problems.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace si = stochinf;

namespace {

py::dict report_dict(const si::NormReport& rep) {
  py::list hist;
  for (const auto& e : rep.bracket_history) {
    hist.append(py::dict("gamma"_a = e.gamma,
                         "status"_a = si::to_string(e.status),
                         "newton_iters"_a = e.newton_iters,
                         "residual"_a = e.residual));
  }
  return py::dict("norm"_a = rep.norm, "gamma_lo"_a = rep.gamma_lo,
                  "gamma_hi"_a = rep.gamma_hi, "tol"_a = rep.tol,
                  "det_hinf"_a = rep.det_hinf, "bracket_history"_a = hist,
                  "timings"_a = rep.timings);
}

si::NewtonOptions newton_options(int kmax, double tol, bool bound_checks) {
  si::NewtonOptions o;
  o.kmax = kmax;
  o.tol = tol;
  o.bound_checks = bound_checks;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Stochastic H-infinity norm of linear systems with multiplicative "
      "white noise";
  m.attr("__version__") = "0.1.0";

  py::register_exception<si::MSUnstable>(m, "MSUnstableError",
                                         PyExc_RuntimeError);
  py::register_exception<si::BracketFailure>(m, "BracketFailureError",
                                             PyExc_RuntimeError);

  py::class_<si::StochasticSystem>(m, "StochasticSystem",
                                   "dx = (A x + B u) dt + sum_j (Nx_j x + "
                                   "Nu_j u) dw_j,  y = C x + D u")
      .def(py::init<si::Matrix, si::Matrix, si::Matrix, si::Matrix,
                    si::Matrix>(),
           "A"_a, "N"_a, "B"_a, "C"_a, "D"_a)
      .def(py::init<si::Matrix, std::vector<si::Matrix>,
                    std::vector<si::Matrix>, si::Matrix, si::Matrix,
                    si::Matrix>(),
           "A"_a, "Nx"_a, "Nu"_a, "B"_a, "C"_a, "D"_a)
      .def_readwrite("A", &si::StochasticSystem::A)
      .def_readwrite("Nx", &si::StochasticSystem::Nx)
      .def_readwrite("Nu", &si::StochasticSystem::Nu)
      .def_readwrite("B", &si::StochasticSystem::B)
      .def_readwrite("C", &si::StochasticSystem::C)
      .def_readwrite("D", &si::StochasticSystem::D)
      .def_property_readonly("n", &si::StochasticSystem::n)
      .def_property_readonly("m", &si::StochasticSystem::m)
      .def_property_readonly("p", &si::StochasticSystem::p)
      .def_property_readonly("noise_terms",
                             &si::StochasticSystem::noise_count)
      .def("validate", &si::StochasticSystem::validate)
      .def("__repr__", [](const si::StochasticSystem& s) {
        return "<StochasticSystem n=" + std::to_string(s.n()) +
               " m=" + std::to_string(s.m()) + " p=" + std::to_string(s.p()) +
               " noise_terms=" + std::to_string(s.noise_count()) + ">";
      });

  m.def("heat_system", &si::heat_system, "k"_a,
        "Heat conduction example on a k x k interior grid (n = k^2)");
  m.def(
      "random_system",
      [](int n, int mm, int p, std::uint64_t seed) {
        return si::random_system(n, mm, p, seed);
      },
      "n"_a, "m"_a, "p"_a, "seed"_a,
      "Seeded random ms-stable system with one state noise term");
  m.def(
      "random_general_system",
      [](int n, int mm, int p, int noise_terms, std::uint64_t seed) {
        return si::random_general_system(n, mm, p, noise_terms, seed);
      },
      "n"_a, "m"_a, "p"_a, "noise_terms"_a, "seed"_a,
      "Seeded random system with state and input noise");

  m.def(
      "ms_stable",
      [](const si::StochasticSystem& sys) {
        return si::ms_stable_fast(sys.A, sys.Nx);
      },
      "sys"_a, "Mean-square stability verdict");
  m.def(
      "ms_stability",
      [](const si::StochasticSystem& sys) {
        const si::MsVerdict v = si::ms_stability(sys.A, sys.Nx);
        return py::dict("stable"_a = v.stable, "abscissa"_a = v.abscissa,
                        "rho"_a = v.rho, "rho_converged"_a = v.rho_converged,
                        "power_iterations"_a = v.power_iterations);
      },
      "sys"_a, "Mean-square stability details: abscissa and rho estimate");

  m.def(
      "det_hinf_norm",
      [](const si::StochasticSystem& sys, double tol) {
        return si::det_hinf_norm(sys.A, sys.B, sys.C, sys.D, tol);
      },
      "sys"_a, "tol"_a = 1e-6,
      "Deterministic H-infinity norm of (A, B, C, D), noise ignored");

  m.def(
      "stoch_hinf_norm",
      [](const si::StochasticSystem& sys, double tol, int kmax,
         double newton_tol, bool bound_checks) {
        si::HinfOptions opts;
        opts.tol = tol;
        opts.newton = newton_options(kmax, newton_tol, bound_checks);
        return report_dict(si::stoch_hinf_norm(sys, opts));
      },
      "sys"_a, "tol"_a = 1e-4, "kmax"_a = 50, "newton_tol"_a = 1e-10,
      "bound_checks"_a = false,
      "Stochastic H-infinity norm; returns the full report as a dict");

  m.def(
      "newton_solve",
      [](const si::StochasticSystem& sys, double gamma, int kmax, double tol,
         bool bound_checks) {
        const si::RiccatiProblem prob(sys, gamma);
        const si::NewtonOutcome out =
            si::newton_solve(prob, newton_options(kmax, tol, bound_checks));
        return py::dict("status"_a = si::to_string(out.status),
                        "X"_a = out.X.mat(), "iterations"_a = out.iterations,
                        "residuals"_a = out.residuals,
                        "rho_final"_a = out.rho_final,
                        "alpha_final"_a = out.alpha_final);
      },
      "sys"_a, "gamma"_a, "kmax"_a = 50, "tol"_a = 1e-10,
      "bound_checks"_a = false,
      "Newton iteration for the Riccati equation at a fixed gamma");

  m.def(
      "profile",
      [](const si::StochasticSystem& sys, const std::vector<double>& gammas,
         int kmax, double tol) {
        const auto pts =
            si::profile(sys, gammas, newton_options(kmax, tol, false));
        py::list out;
        for (const auto& pt : pts) {
          out.append(py::dict(
              "gamma"_a = pt.gamma, "rho"_a = pt.rho, "alpha"_a = pt.alpha,
              "status"_a = si::to_string(pt.status),
              "newton_iters"_a = pt.newton_iters,
              "alpha_is_surrogate"_a = pt.alpha_is_surrogate));
        }
        return out;
      },
      "sys"_a, "gammas"_a, "kmax"_a = 50, "tol"_a = 1e-10,
      "rho and alpha of the stabilizing solution on a gamma grid");
  m.def("default_profile_grid", &si::default_profile_grid, "norm"_a,
        "points"_a = 50);

  m.def(
      "mc_norm_lower_bound",
      [](const si::StochasticSystem& sys,
         const std::function<si::Vector(double)>& u, double t_final,
         double dt, int paths, std::uint64_t seed) {
        si::McOptions opts;
        opts.t_final = t_final;
        opts.dt = dt;
        opts.paths = paths;
        opts.seed = seed;
        const si::McEstimate est = si::mc_norm_lower_bound(sys, u, opts);
        return py::make_tuple(est.ratio, est.std_error);
      },
      "sys"_a, "u"_a, "t_final"_a = 20.0, "dt"_a = 1e-3, "paths"_a = 200,
      "seed"_a = 1,
      "Monte Carlo gain estimate (ratio, std_error) for a deterministic "
      "input signal u(t)");

  m.def(
      "load_manifest",
      [](const std::string& path) {
        si::SystemManifest mf = si::load_manifest(path);
        return py::make_tuple(mf.system, mf.name);
      },
      "path"_a, "Load a system manifest; returns (system, name)");
  m.def(
      "save_manifest",
      [](const std::string& path, const si::StochasticSystem& sys,
         const std::string& name, bool inline_arrays) {
        si::save_manifest(path, sys, name, "", inline_arrays);
      },
      "path"_a, "sys"_a, "name"_a = "", "inline_arrays"_a = false);
}
