#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbf/beamforming.hpp"

namespace cbf {

// Deterministic splitmix64 stream with Box-Muller normals; used for all
// stochastic channel generation so outputs are reproducible across builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  std::complex<double> cnormal();  // CN(0, 1): unit second moment

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Independent substream for one trial; identical regardless of how trials
// are scheduled across threads.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

enum class ChannelProfile {
  Normalized,  // unit-variance Rayleigh entries; power set from the SNR sweep
  Cellular     // uniform geometry + path loss + lognormal shadowing
};

struct Scenario {
  // network size
  int num_aps = 10;
  int num_users = 5;
  std::vector<int> ap_antennas = std::vector<int>(10, 1);
  FieldMode field_mode = FieldMode::Complex;

  // channel model
  ChannelProfile profile = ChannelProfile::Normalized;
  double half_width_m = 1000.0;
  double pathloss_a = 128.1;  // L(d) = a + b log10(d/1km) [dB]
  double pathloss_b = 37.6;
  double shadowing_std_db = 8.0;
  double antenna_gain_dbi = 9.0;
  double min_distance_m = 1.0;

  // budgets / noise (cellular profile; the normalized profile uses
  // sigma^2 = 1 W and P_l = 10^(snr_db/10) W)
  double power_dbm = 30.0;
  double noise_dbm = -102.0;

  // experiment control
  std::uint64_t seed = 1;
  int trials = 200;
  std::vector<double> snr_db = {0.0, 5.0, 10.0};
  double density_snr_db = 10.0;
  std::vector<int> density_aps = {2, 4, 6, 8};
  double density_user_ratio = 1.0;
  int bench_refreshes = 25;
  std::vector<int> solve_sizes = {2, 4, 8, 16};

  // solver
  double eps = 1e-3;
  double alpha = 1.0;
  int max_iter = 10000;
  bool normalize = true;  // equilibrate solver data (experiment-level default)
  double eps_rate = 0.01;
  int threads = 0;  // 0 = hardware concurrency

  SolverSettings solver_settings() const;
  NetworkConfig make_config(double snr_db_point) const;
  Scenario with_size(int aps, int users, int antennas_each) const;
};

double dbm_to_watts(double dbm);

// Flat key = value text format; '#' starts a comment, arrays are
// comma-separated. Unknown keys are rejected.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

// One channel realization for (scenario.seed, trial); deterministic.
ChannelRealization generate_channels(const Scenario& sc, int trial);

// '#'-prefixed header lines describing the scenario (emitted atop CSVs).
void write_scenario_header(const Scenario& sc, std::ostream& os, bool deterministic);

}  // namespace cbf
