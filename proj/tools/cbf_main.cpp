#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cbf/errors.hpp"
#include "cbf/experiments.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> eps;
  std::string out_path;
  bool deterministic = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario_path, "scenario file (key = value lines)");
  cmd->add_option("--seed", args.seed, "override RNG seed");
  cmd->add_option("--trials", args.trials, "override trial count");
  cmd->add_option("--eps", args.eps, "override solver tolerance");
  cmd->add_option("--out", args.out_path, "write CSV/report to this path");
  cmd->add_flag("--deterministic", args.deterministic, "suppress timestamp header line");
  cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

cbf::Scenario resolve_scenario(const CommonArgs& args) {
  cbf::Scenario sc;
  if (!args.scenario_path.empty()) sc = cbf::load_scenario(args.scenario_path);
  if (args.seed) sc.seed = *args.seed;
  if (args.trials) sc.trials = *args.trials;
  if (args.eps) sc.eps = *args.eps;
  if (args.threads > 0) sc.threads = args.threads;
  return sc;
}

void emit(const std::string& text, const CommonArgs& args) {
  if (args.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(args.out_path, std::ios::binary);
  if (!f) throw cbf::ConfigError("cannot open output file '" + args.out_path + "'");
  f << text;
}

int run_maxmin(const CommonArgs& args) {
  cbf::Scenario sc = resolve_scenario(args);
  if (args.scenario_path.empty()) {
    // small cellular demo network
    sc = sc.with_size(4, 3, 2);
    sc.profile = cbf::ChannelProfile::Cellular;
  }
  const cbf::NetworkConfig config = sc.make_config(sc.density_snr_db);
  const cbf::ChannelRealization ch = cbf::generate_channels(sc, 0);

  const cbf::MaxMinResult mm =
      cbf::max_min_bisection(ch, config, sc.solver_settings(), sc.eps_rate);
  const double power_w = mm.beams.v.squaredNorm();

  std::printf("max-min rate:      %.6g bits/s/Hz%s\n", mm.gamma_star,
              mm.gamma_max_feasible ? " (upper bound feasible)" : "");
  std::printf("total tx power:    %.6g W (%.4g dBm)\n", power_w,
              power_w > 0 ? cbf::watts_to_dbm(power_w) : 0.0);
  std::printf("bisection steps:   %d (+1 bound probe), admm iterations: %lld\n",
              mm.bisection_steps, mm.admm_iterations);
  if (mm.inconclusive_count > 0)
    std::printf("warning: %d solver-inconclusive step(s) treated as infeasible\n",
                mm.inconclusive_count);
  if (config.total_antennas() >= config.num_users) {
    const cbf::ZfResult zf = cbf::zf_baseline(ch, config);
    std::printf("zero-forcing rate: %.6g bits/s/Hz\n", zf.min_rate);
  }
  return 0;
}

int run_selftest() {
  using namespace cbf;
  int failures = 0;
  auto check = [&](bool ok, const char* what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what);
    if (!ok) ++failures;
  };

  // projection spot checks
  const Eigen::VectorXd soc = project_factor({ConeKind::SecondOrder, 3},
                                             (Eigen::VectorXd(3) << 0, 3, 4).finished());
  check(std::abs(soc(0) - 2.5) < 1e-12 && std::abs(soc(1) - 1.5) < 1e-12, "soc projection");

  // unit instance: L=K=N=1, h=2, sigma=1, P=4, theta=1 -> ||v|| = 0.5
  NetworkConfig config;
  config.num_aps = config.num_users = 1;
  config.ap_antennas = {1};
  config.power_budgets = Eigen::VectorXd::Constant(1, 4.0);
  config.noise_powers = Eigen::VectorXd::Ones(1);
  config.weights = Eigen::VectorXd::Ones(1);
  config.field_mode = FieldMode::Real;
  ChannelRealization ch;
  ch.h = Eigen::MatrixXcd::Constant(1, 1, 2.0);
  ConicWorkspace ws = make_workspace(config);
  SolverSettings settings;
  settings.eps = 1e-6;
  const auto out = feasibility_solve(1.0, ch, config, ws, settings);
  check(out.status == FeasibilityStatus::Feasible &&
            std::abs(out.beams.v.norm() - 0.5) < 1e-3,
        "unit-instance feasibility solve");

  // stuffing equals rebuild
  Scenario sc;
  sc = sc.with_size(3, 2, 2);
  sc.bench_refreshes = 3;
  check(bench_stuffing(sc).equality_ok, "stuff == rebuild");

  std::printf(failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated beamforming via conic ADMM"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* maxmin = app.add_subcommand("maxmin", "solve one max-min instance");
  add_common(maxmin, args);
  auto* sweep_snr = app.add_subcommand("sweep-snr", "rate vs SNR sweep (CSV)");
  add_common(sweep_snr, args);
  auto* sweep_density = app.add_subcommand("sweep-density", "rate vs density sweep (CSV)");
  add_common(sweep_density, args);
  auto* bench_stuff = app.add_subcommand("bench-stuff", "time stuffing vs rebuild");
  add_common(bench_stuff, args);
  auto* bench_solve = app.add_subcommand("bench-solve", "solver scaling report");
  add_common(bench_solve, args);
  app.add_subcommand("selftest", "run built-in smoke checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("maxmin")) return run_maxmin(args);
    if (app.got_subcommand("selftest")) return run_selftest();

    cbf::SweepOptions opt;
    opt.deterministic = args.deterministic;
    opt.threads = args.threads;

    if (app.got_subcommand("sweep-snr")) {
      emit(cbf::run_rate_vs_snr(resolve_scenario(args), opt), args);
    } else if (app.got_subcommand("sweep-density")) {
      emit(cbf::run_rate_vs_density(resolve_scenario(args), opt), args);
    } else if (app.got_subcommand("bench-stuff")) {
      cbf::Scenario sc = resolve_scenario(args);
      if (args.scenario_path.empty()) sc = sc.with_size(20, 10, 2);
      if (args.trials) sc.bench_refreshes = *args.trials;
      const auto rep = cbf::bench_stuffing(sc);
      emit(rep.text, args);
      if (!rep.equality_ok) return 2;
    } else if (app.got_subcommand("bench-solve")) {
      emit(cbf::bench_solver(resolve_scenario(args)).text, args);
    }
  } catch (const cbf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const cbf::DimensionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
