#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cbf/scenario.hpp"

namespace cbf {

struct TrialRecord {
  int trial = 0;
  double opt_rate = 0.0;       // gamma* from bisection
  double zf_rate = 0.0;
  bool zf_applicable = false;
  long long solver_iterations = 0;
  int bisection_steps = 0;
  int inconclusive = 0;
  double solve_time_s = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepOptions {
  bool deterministic = false;  // suppress the timestamp header line
  int threads = 0;             // 0 = scenario setting, then hardware
};

// Runs `fn(trial)` for trial = 0..count-1 on a small worker pool; results
// must be slotted by index inside fn, so output is schedule-independent.
void parallel_trials(int count, int threads, const std::function<void(int)>& fn);

TrialRecord run_trial(const Scenario& sc, const NetworkConfig& config, int trial);

// Fig.2-style sweep: per SNR point, mean/std of the optimal and ZF rates.
// Columns: snr_db,mean_opt_rate,mean_zf_rate,std_opt,std_zf,trials
std::string run_rate_vs_snr(const Scenario& sc, const SweepOptions& opt = {});

// Fig.3-style sweep at fixed K/L ratio and fixed SNR; gap column included.
// Columns: num_aps,num_users,mean_opt_rate,mean_zf_rate,gap,std_opt,std_zf,
//          stderr_gap,trials,zf_excluded
std::string run_rate_vs_density(const Scenario& sc, const SweepOptions& opt = {});

struct StuffBenchReport {
  Eigen::Index num_rows = 0, num_vars = 0, nonzeros = 0;
  bool equality_ok = false;     // template+stuff == build_from_scratch, checked first
  double median_stuff_s = 0.0;
  double median_build_s = 0.0;
  double speedup = 0.0;
  int refreshes = 0;
  std::string text;             // human-readable report
};

StuffBenchReport bench_stuffing(const Scenario& sc);

struct SolveBenchRow {
  int num_aps = 0, num_users = 0;
  Eigen::Index num_rows = 0, num_vars = 0, nonzeros = 0;
  double solve_s = 0.0;
  int iterations = 0;
  double per_iter_s = 0.0;
  double primal_res = 0.0, dual_res = 0.0, gap = 0.0;
  std::string status;
};

struct SolveBenchReport {
  std::vector<SolveBenchRow> rows;
  double loglog_slope = 0.0;  // of per-iteration time vs row count
  std::string text;
};

SolveBenchReport bench_solver(const Scenario& sc);

}  // namespace cbf
