#include "cbf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <thread>

#include "cbf/errors.hpp"

namespace cbf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

int resolve_threads(const Scenario& sc, const SweepOptions& opt) {
  int t = opt.threads > 0 ? opt.threads : sc.threads;
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}

}  // namespace

void parallel_trials(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

TrialRecord run_trial(const Scenario& sc, const NetworkConfig& config, int trial) {
  TrialRecord rec;
  rec.trial = trial;
  try {
    const ChannelRealization ch = generate_channels(sc, trial);
    const auto t0 = Clock::now();
    const MaxMinResult mm =
        max_min_bisection(ch, config, sc.solver_settings(), sc.eps_rate);
    rec.solve_time_s = seconds_since(t0);
    rec.opt_rate = mm.gamma_star;
    rec.solver_iterations = mm.admm_iterations;
    rec.bisection_steps = mm.bisection_steps;
    rec.inconclusive = mm.inconclusive_count;

    if (config.total_antennas() >= config.num_users) {
      const ZfResult zf = zf_baseline(ch, config);
      rec.zf_applicable = zf.applicable;
      rec.zf_rate = zf.min_rate;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

std::string run_rate_vs_snr(const Scenario& sc, const SweepOptions& opt) {
  std::ostringstream os;
  write_scenario_header(sc, os, opt.deterministic);
  os << "snr_db,mean_opt_rate,mean_zf_rate,std_opt,std_zf,trials\n";

  const int threads = resolve_threads(sc, opt);
  std::vector<std::string> failures;
  for (double snr : sc.snr_db) {
    const NetworkConfig config = sc.make_config(snr);
    std::vector<TrialRecord> recs(sc.trials);
    parallel_trials(sc.trials, threads,
                    [&](int t) { recs[t] = run_trial(sc, config, t); });

    std::vector<double> opt_rates, zf_rates;
    for (const auto& r : recs) {
      if (r.failed) {
        failures.push_back("# failure snr=" + fmt(snr) + " trial=" +
                           std::to_string(r.trial) + " " + r.error);
        continue;
      }
      opt_rates.push_back(r.opt_rate);
      if (r.zf_applicable) zf_rates.push_back(r.zf_rate);
    }
    os << fmt(snr) << "," << fmt(mean_of(opt_rates)) << "," << fmt(mean_of(zf_rates))
       << "," << fmt(sample_std(opt_rates)) << "," << fmt(sample_std(zf_rates)) << ","
       << opt_rates.size() << "\n";
  }
  for (const auto& f : failures) os << f << "\n";
  return os.str();
}

std::string run_rate_vs_density(const Scenario& sc, const SweepOptions& opt) {
  std::ostringstream os;
  write_scenario_header(sc, os, opt.deterministic);
  os << "num_aps,num_users,mean_opt_rate,mean_zf_rate,gap,std_opt,std_zf,stderr_gap,"
        "trials,zf_excluded\n";

  const int threads = resolve_threads(sc, opt);
  const int antennas_each = sc.ap_antennas.empty() ? 1 : sc.ap_antennas.front();
  std::vector<std::string> failures;
  for (int aps : sc.density_aps) {
    const int users = std::max(1, static_cast<int>(std::lround(aps * sc.density_user_ratio)));
    const Scenario point = sc.with_size(aps, users, antennas_each);
    const NetworkConfig config = point.make_config(sc.density_snr_db);
    std::vector<TrialRecord> recs(point.trials);
    parallel_trials(point.trials, threads,
                    [&](int t) { recs[t] = run_trial(point, config, t); });

    std::vector<double> opt_rates, zf_rates, gaps;
    int zf_excluded = 0;
    for (const auto& r : recs) {
      if (r.failed) {
        failures.push_back("# failure aps=" + std::to_string(aps) + " trial=" +
                           std::to_string(r.trial) + " " + r.error);
        continue;
      }
      opt_rates.push_back(r.opt_rate);
      if (r.zf_applicable) {
        zf_rates.push_back(r.zf_rate);
        gaps.push_back(r.opt_rate - r.zf_rate);
      } else {
        ++zf_excluded;
      }
    }
    const double stderr_gap =
        gaps.size() > 1 ? sample_std(gaps) / std::sqrt(static_cast<double>(gaps.size()))
                        : 0.0;
    os << aps << "," << users << "," << fmt(mean_of(opt_rates)) << ","
       << fmt(mean_of(zf_rates)) << "," << fmt(mean_of(gaps)) << ","
       << fmt(sample_std(opt_rates)) << "," << fmt(sample_std(zf_rates)) << ","
       << fmt(stderr_gap) << "," << opt_rates.size() << "," << zf_excluded << "\n";
  }
  for (const auto& f : failures) os << f << "\n";
  return os.str();
}

namespace {

struct RandomParams {
  Eigen::MatrixXcd channels;
  Eigen::VectorXd powers, sigma, weights;
  double gamma;
};

RandomParams random_params(const ProblemDims& d, Rng& rng) {
  RandomParams p;
  p.channels.resize(d.total_antennas, d.num_users);
  for (Eigen::Index j = 0; j < p.channels.cols(); ++j)
    for (Eigen::Index i = 0; i < p.channels.rows(); ++i) {
      auto z = rng.cnormal();
      p.channels(i, j) =
          d.field_mode == FieldMode::Complex ? z : std::complex<double>(z.real() * 1.4142135623730951, 0.0);
    }
  p.powers = Eigen::VectorXd::NullaryExpr(d.num_aps, [&](Eigen::Index) { return 0.5 + 4.0 * rng.uniform(); });
  p.sigma = Eigen::VectorXd::NullaryExpr(d.num_users, [&](Eigen::Index) { return 0.5 + rng.uniform(); });
  p.weights = Eigen::VectorXd::Ones(d.num_users);
  p.gamma = 0.2 + 2.0 * rng.uniform();
  return p;
}

}  // namespace

StuffBenchReport bench_stuffing(const Scenario& sc) {
  StuffBenchReport rep;
  const ProblemDims dims =
      compute_dims(sc.num_aps, sc.num_users, sc.ap_antennas, sc.field_mode);
  rep.num_rows = dims.num_rows;
  rep.num_vars = dims.num_vars;
  rep.refreshes = std::max(3, sc.bench_refreshes);

  auto [tmpl, prob] = build_template(dims);
  rep.nonzeros = prob.A.nonzeros();
  Rng rng = trial_rng(sc.seed, 0xbe9c7);

  // correctness before timing
  rep.equality_ok = true;
  for (int i = 0; i < 3; ++i) {
    const RandomParams p = random_params(dims, rng);
    stuff(tmpl, prob, p.channels, p.powers, p.sigma, p.weights, p.gamma);
    const ConicProblem scratch =
        build_from_scratch(dims, p.channels, p.powers, p.sigma, p.weights, p.gamma);
    if (!equal_data(prob, scratch)) rep.equality_ok = false;
  }

  std::vector<double> stuff_times, build_times;
  for (int i = 0; i < rep.refreshes; ++i) {
    const RandomParams p = random_params(dims, rng);
    auto t0 = Clock::now();
    stuff(tmpl, prob, p.channels, p.powers, p.sigma, p.weights, p.gamma);
    stuff_times.push_back(seconds_since(t0));
    t0 = Clock::now();
    const ConicProblem scratch =
        build_from_scratch(dims, p.channels, p.powers, p.sigma, p.weights, p.gamma);
    build_times.push_back(seconds_since(t0));
    if (scratch.num_rows() != dims.num_rows) rep.equality_ok = false;  // keep it alive
  }
  rep.median_stuff_s = median_of(stuff_times);
  rep.median_build_s = median_of(build_times);
  rep.speedup = rep.median_stuff_s > 0.0 ? rep.median_build_s / rep.median_stuff_s : 0.0;

  std::ostringstream os;
  os << "stuffing benchmark: L=" << sc.num_aps << " K=" << sc.num_users
     << " n=" << rep.num_vars << " m=" << rep.num_rows << " nnz=" << rep.nonzeros << "\n"
     << "equality check: " << (rep.equality_ok ? "ok" : "FAILED") << "\n"
     << "median stuff:   " << fmt(rep.median_stuff_s * 1e6) << " us\n"
     << "median rebuild: " << fmt(rep.median_build_s * 1e6) << " us\n"
     << "speedup:        " << fmt(rep.speedup) << "x over " << rep.refreshes
     << " refreshes\n";
  rep.text = os.str();
  return rep;
}

SolveBenchReport bench_solver(const Scenario& sc) {
  SolveBenchReport rep;
  std::ostringstream os;
  os << "solver benchmark (N_l=2, complex)\n";
  os << "L,K,m,n,nnz,status,iterations,solve_s,per_iter_s,pres,dres,gap\n";

  for (int size : sc.solve_sizes) {
    const Scenario point = sc.with_size(size, size, 2);
    const NetworkConfig config = point.make_config(sc.density_snr_db);
    const ChannelRealization ch = generate_channels(point, 0);

    ConicWorkspace ws = make_workspace(config);
    const double gamma = 0.5 * gamma_max_default(ch, config);
    stuff(ws.tmpl, ws.prob, ch.h, config.power_budgets, config.noise_powers.cwiseSqrt(),
          config.weights, std::max(gamma, 1e-3));

    SolveBenchRow row;
    row.num_aps = size;
    row.num_users = size;
    row.num_rows = ws.prob.num_rows();
    row.num_vars = ws.prob.num_vars();
    row.nonzeros = ws.prob.A.nonzeros();

    SolverSettings settings = sc.solver_settings();
    auto t0 = Clock::now();
    const SolveResult res = solve_conic(ws.prob, settings);
    row.solve_s = seconds_since(t0);
    row.iterations = res.iterations;
    row.primal_res = res.primal_res;
    row.dual_res = res.dual_res;
    row.gap = res.gap;
    row.status = to_string(res.status);

    // per-iteration cost from fixed-length runs (factorization excluded)
    SolverSettings fixed = settings;
    fixed.eps = 1e-14;
    fixed.max_iter = 10;
    t0 = Clock::now();
    solve_conic(ws.prob, fixed);
    const double t_short = seconds_since(t0);
    fixed.max_iter = 110;
    t0 = Clock::now();
    solve_conic(ws.prob, fixed);
    const double t_long = seconds_since(t0);
    row.per_iter_s = std::max((t_long - t_short) / 100.0, 1e-12);

    os << size << "," << size << "," << row.num_rows << "," << row.num_vars << ","
       << row.nonzeros << "," << row.status << "," << row.iterations << ","
       << fmt(row.solve_s) << "," << fmt(row.per_iter_s) << "," << fmt(row.primal_res)
       << "," << fmt(row.dual_res) << "," << fmt(row.gap) << "\n";
    rep.rows.push_back(row);
  }

  // least-squares slope of log(per-iteration time) against log(m)
  if (rep.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rep.rows.size());
    for (const auto& r : rep.rows) {
      const double x = std::log(static_cast<double>(r.num_rows));
      const double y = std::log(r.per_iter_s);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    rep.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  os << "log-log slope of per-iteration time vs m: " << fmt(rep.loglog_slope) << "\n";
  rep.text = os.str();
  return rep;
}

}  // namespace cbf
