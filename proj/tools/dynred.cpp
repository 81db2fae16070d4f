// Copyright 2026 The dynred authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "dynred/unraveling.hpp"
#include "experiments.hpp"
#include "report_io.hpp"

namespace {

using namespace dynred;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("DYNRED_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return "dynred_out";
}

DensityOp<double> initial_density(const RunConfig& cfg) {
  if (cfg.initial == "pure") {
    return density_from_pure(PureState<double>::superposition(cfg.a(), cfg.b()));
  }
  CMatrixd m = CMatrixd::Zero(2, 2);
  m(0, 0) = std::norm(cfg.a());
  m(1, 1) = std::norm(cfg.b());
  return DensityOp<double>(std::move(m));
}

void print_report(const ExperimentReport& rep,
                  const std::vector<std::filesystem::path>& files) {
  for (const auto& v : rep.verdicts) {
    std::cout << (v.passed ? "[PASS] " : "[FAIL] ") << rep.name << "/" << v.name
              << ": " << v.detail << "\n";
  }
  for (const auto& r : rep.results) {
    std::cout << "  " << r.label << " = " << format_g17(r.value);
    if (r.uncertainty) std::cout << " +- " << format_g17(*r.uncertainty);
    std::cout << " [" << r.oracle << "]\n";
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int finish(const ExperimentReport& rep, const RunConfig& cfg) {
  const auto files = write_report(rep, resolve_out_dir(cfg));
  print_report(rep, files);
  if (!rep.passed()) {
    std::cout << "result: FAIL\n";
    return 1;
  }
  std::cout << "result: PASS\n";
  return 0;
}

void push_grid_params(ExperimentReport& rep, const RunConfig& cfg) {
  rep.parameters.emplace_back("t_end", format_g17(cfg.grid.t_end));
  rep.parameters.emplace_back("grid_count", std::to_string(cfg.grid.count));
  rep.parameters.emplace_back("grid_scale",
                              cfg.grid.log_scale ? "log" : "linear");
}

int run_evolve(const RunConfig& cfg) {
  validate_config(cfg, "evolve");
  const auto params = cfg.params();
  const std::vector<double> grid = make_time_grid(cfg.grid);
  const Evolution<double> ev =
      evolve_master(initial_density(cfg), two_level_reduction(params), grid);
  const auto rec = BlochRecord<double>::from_evolution(ev);

  ExperimentReport rep;
  rep.name = "evolve";
  rep.parameters.emplace_back("lam", format_g17(cfg.lam));
  rep.parameters.emplace_back("eps", format_g17(cfg.eps));
  rep.parameters.emplace_back("initial", cfg.initial);
  push_grid_params(rep, cfg);
  rep.results.push_back({"r_final", rec.r.back(), {}, {}, "ode"});
  rep.results.push_back({"re_beta_final", rec.re_beta.back(), {}, {}, "ode"});
  rep.results.push_back({"im_beta_final", rec.im_beta.back(), {}, {}, "ode"});
  rep.results.push_back(
      {"max_trace_drift", ev.diagnostics.max_trace_drift, {}, {}, "ode"});
  rep.results.push_back(
      {"min_eigenvalue", ev.diagnostics.min_eigenvalue, {}, {}, "ode"});
  rep.series.push_back({"bloch", rec, {}, {}});
  return finish(rep, cfg);
}

int run_analytic(const RunConfig& cfg) {
  validate_config(cfg, "analytic");
  const auto params = cfg.params();
  const std::vector<double> grid = make_time_grid(cfg.grid);
  const DensityOp<double> rho0 = initial_density(cfg);
  const double r0 = bloch_r(rho0);
  const std::complex<double> beta0 = bloch_beta(rho0);

  BlochRecord<double> rec;
  for (double t : grid) {
    const BlochPoint<double> pt = analytic_two_level(r0, beta0, params, t);
    rec.times.push_back(t);
    rec.r.push_back(pt.r);
    rec.re_beta.push_back(pt.beta.real());
    rec.im_beta.push_back(pt.beta.imag());
  }

  ExperimentReport rep;
  rep.name = "analytic";
  rep.parameters.emplace_back("lam", format_g17(cfg.lam));
  rep.parameters.emplace_back("eps", format_g17(cfg.eps));
  rep.parameters.emplace_back("initial", cfg.initial);
  push_grid_params(rep, cfg);
  rep.results.push_back({"r_final", rec.r.back(), {}, {}, "analytic"});
  rep.results.push_back({"re_beta_final", rec.re_beta.back(), {}, {}, "analytic"});
  rep.results.push_back({"im_beta_final", rec.im_beta.back(), {}, {}, "analytic"});
  rep.series.push_back({"bloch", rec, {}, {}});
  return finish(rep, cfg);
}

int run_trajectories(const RunConfig& cfg) {
  validate_config(cfg, "trajectories");
  const auto params = cfg.params();
  const std::vector<double> grid = make_time_grid(cfg.grid);
  const PureState<double> psi0 =
      PureState<double>::superposition(cfg.a(), cfg.b());
  const GeneralReduction<double> spec = two_level_reduction(params);

  EnsembleOptions<double> opts;
  opts.n_threads = cfg.n_threads;
  const EnsembleStats<double> stats =
      run_ensemble(psi0, spec, grid, cfg.n_traj, cfg.master_seed, opts);
  const Evolution<double> ev =
      evolve_master(density_from_pure(psi0), spec, grid);
  const auto rec = BlochRecord<double>::from_evolution(ev);

  BlochSeries series{"bloch", rec, {}, {}};
  double worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r_mc = stats.mean_rho[i].matrix()(0, 0).real();
    const double se = stats.stderr_re[i](0, 0);
    series.r_mc.push_back(r_mc);
    series.stderr_r.push_back(se);
    worst = std::max(worst, std::abs(r_mc - rec.r[i]) - 5.0 * se);
  }

  ExperimentReport rep;
  rep.name = "trajectories";
  rep.parameters.emplace_back("lam", format_g17(cfg.lam));
  rep.parameters.emplace_back("eps", format_g17(cfg.eps));
  rep.parameters.emplace_back("n_traj", std::to_string(cfg.n_traj));
  rep.parameters.emplace_back("master_seed", std::to_string(cfg.master_seed));
  push_grid_params(rep, cfg);
  for (std::size_t k = 0; k < stats.outcome_labels.size(); ++k) {
    rep.results.push_back({"freq_" + stats.outcome_labels[k],
                           stats.outcome_freq[k], {}, {}, "monte-carlo"});
  }
  rep.results.push_back({"max_excess_over_5se", worst, {}, {}, "monte-carlo"});
  rep.verdicts.push_back(
      {"mc-within-5-sigma", worst <= 1e-12,
       "max(|r_mc - r_ode| - 5 SE) = " + format_g17(worst) +
           "; the ensemble mean must track the master equation"});
  rep.series.push_back(std::move(series));
  return finish(rep, cfg);
}

int run_experiment(const RunConfig& cfg, const std::string& name) {
  bool known = false;
  for (const auto& n : known_experiments()) known = known || n == name;
  if (!known) {
    throw ConfigError("'" + name +
                      "' is not an experiment; see 'dynred list'");
  }
  validate_config(cfg, name);
  ExperimentReport rep;
  if (name == "mixture-vs-pure") {
    rep = exp_mixture_vs_pure(cfg.params(), cfg.a(), cfg.b(),
                              resolve_t_eval(cfg), cfg.grid.count, cfg.tol);
  } else if (name == "sign-flip") {
    const double t_eval =
        cfg.t_eval ? *cfg.t_eval : std::max(1.0, 100.0 / cfg.lam);
    rep = exp_sign_flip_no_signalling(cfg.params(), cfg.a(), cfg.b(), t_eval,
                                      cfg.grid.count, cfg.tol);
  } else if (name == "macroscopic") {
    rep = exp_macroscopic(cfg.a(), cfg.b(), cfg.n_traj, cfg.master_seed,
                          cfg.tol);
  } else if (name == "spohn") {
    rep = exp_spohn_longtime(
        cfg.params(),
        density_from_pure(PureState<double>::superposition(cfg.a(), cfg.b())),
        cfg.tol);
  } else if (name == "degenerate-4d") {
    rep = exp_degenerate_4d(cfg.lam, cfg.fourd_eps, cfg.fourd_seed,
                            cfg.fourd_t_eval, cfg.tol);
  } else {
    rep = exp_decoherence_demo(cfg.sweep_points, cfg.tol);
  }
  return finish(rep, cfg);
}

int run_list() {
  std::cout << "experiments:\n"
            << "  mixture-vs-pure  plateau populations: superposition vs mixture\n"
            << "  sign-flip        sign-flipped superpositions cancel exactly\n"
            << "  macroscopic      jump ensemble at reduction rate 1e7/s\n"
            << "  spohn            long-time relaxation to the stationary state\n"
            << "  degenerate-4d    two rank-2 manifolds: conditional states\n"
            << "  decoherence      interference vs environment overlap\n"
            << "modes: evolve, analytic, trajectories, experiment <name>, list\n";
  return 0;
}

struct Overrides {
  std::optional<double> lam, eps, A_phase, a_mod, a_phase, b_mod, b_phase;
  std::optional<double> t_eval, t_end, grid_t_start, fourd_eps, fourd_t_eval;
  std::optional<std::uint64_t> master_seed, fourd_seed;
  std::optional<int> grid_count, sweep_points;
  std::optional<std::size_t> n_traj;
  std::optional<unsigned> n_threads;
  std::optional<std::string> grid_scale, initial, out_dir;

  void apply(RunConfig& cfg) const {
    if (lam) cfg.lam = *lam;
    if (eps) cfg.eps = *eps;
    if (A_phase) cfg.A_phase = *A_phase;
    if (a_mod) cfg.a_mod = *a_mod;
    if (a_phase) cfg.a_phase = *a_phase;
    if (b_mod) cfg.b_mod = *b_mod;
    if (b_phase) cfg.b_phase = *b_phase;
    if (t_eval) cfg.t_eval = *t_eval;
    if (t_end) cfg.grid.t_end = *t_end;
    if (grid_t_start) cfg.grid.t_start = *grid_t_start;
    if (fourd_eps) cfg.fourd_eps = *fourd_eps;
    if (fourd_t_eval) cfg.fourd_t_eval = *fourd_t_eval;
    if (master_seed) cfg.master_seed = *master_seed;
    if (fourd_seed) cfg.fourd_seed = *fourd_seed;
    if (grid_count) cfg.grid.count = *grid_count;
    if (sweep_points) cfg.sweep_points = *sweep_points;
    if (n_traj) cfg.n_traj = *n_traj;
    if (n_threads) cfg.n_threads = *n_threads;
    if (grid_scale) cfg.grid.log_scale = *grid_scale == "log";
    if (initial) cfg.initial = *initial;
    if (out_dir) cfg.out_dir = *out_dir;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamical-reduction two-level model: master equation, closed "
               "form, jump trajectories and verification experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  app.add_option("--config", config_path, "configuration file (key = value lines)");
  app.add_option("--out-dir", ov.out_dir, "report output directory");
  app.add_option("--seed", ov.master_seed, "master seed for trajectory streams");
  app.add_option("--lam", ov.lam, "reduction rate (1/s)");
  app.add_option("--eps", ov.eps, "omega / lam");
  app.add_option("--A-phase", ov.A_phase, "phase of the coupling element A");
  app.add_option("--a-mod", ov.a_mod, "|a| of the initial superposition");
  app.add_option("--a-phase", ov.a_phase, "arg(a)");
  app.add_option("--b-mod", ov.b_mod, "|b| of the initial superposition");
  app.add_option("--b-phase", ov.b_phase, "arg(b)");
  app.add_option("--t-eval", ov.t_eval, "plateau evaluation time (s)");
  app.add_option("--t-end", ov.t_end, "end of the output time grid (s)");
  app.add_option("--grid-count", ov.grid_count, "number of grid points");
  app.add_option("--grid-scale", ov.grid_scale, "linear or log")
      ->check(CLI::IsMember({"linear", "log"}));
  app.add_option("--grid-t-start", ov.grid_t_start, "first point of a log grid");
  app.add_option("--n-traj", ov.n_traj, "number of trajectories");
  app.add_option("--n-threads", ov.n_threads, "worker threads");
  app.add_option("--initial", ov.initial, "initial state: pure or mixture")
      ->check(CLI::IsMember({"pure", "mixture"}));
  app.add_option("--fourd-eps", ov.fourd_eps, "coupling scale of the 4D model");
  app.add_option("--fourd-seed", ov.fourd_seed, "seed of the 4D model");
  app.add_option("--fourd-t-eval", ov.fourd_t_eval, "4D evaluation time (s)");
  app.add_option("--sweep-points", ov.sweep_points, "overlap sweep points");

  auto* sub_evolve =
      app.add_subcommand("evolve", "integrate the master equation");
  auto* sub_analytic =
      app.add_subcommand("analytic", "evaluate the closed-form solution");
  auto* sub_traj = app.add_subcommand(
      "trajectories", "jump unraveling ensemble with master-equation reference");
  auto* sub_exp =
      app.add_subcommand("experiment", "run a named verification experiment");
  auto* sub_list = app.add_subcommand("list", "list experiments and modes");
  std::string exp_name;
  sub_exp->add_option("name", exp_name, "experiment name (see 'list')");
  for (auto* sub : {sub_evolve, sub_analytic, sub_traj, sub_exp, sub_list}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_file(config_path));
    ov.apply(cfg);

    if (sub_list->parsed()) return run_list();
    std::cout << "# resolved configuration\n" << echo_config(cfg);
    if (sub_evolve->parsed()) return run_evolve(cfg);
    if (sub_analytic->parsed()) return run_analytic(cfg);
    if (sub_traj->parsed()) return run_trajectories(cfg);
    const std::string name = exp_name.empty() ? cfg.experiment : exp_name;
    return run_experiment(cfg, name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
