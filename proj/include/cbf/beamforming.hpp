#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cbf/solver.hpp"
#include "cbf/stuffing.hpp"

namespace cbf {

// Static network description: sizes, per-AP budgets (watts), per-user noise
// powers (watts), rate weights.
struct NetworkConfig {
  int num_aps = 1;
  int num_users = 1;
  std::vector<int> ap_antennas;       // N_l
  Eigen::VectorXd power_budgets;      // P_l [W]
  Eigen::VectorXd noise_powers;       // sigma_k^2 [W]
  Eigen::VectorXd weights;            // omega_k, default all-ones
  FieldMode field_mode = FieldMode::Complex;

  int total_antennas() const;
  void validate() const;
  ProblemDims dims() const;
};

// Stacked channels: column k is h_k = [h_k1; ...; h_kL] of length N.
struct ChannelRealization {
  Eigen::MatrixXcd h;
};

// Stacked beamformers: column k is v_k = [v_1k; ...; v_Lk] of length N.
struct BeamformerSet {
  Eigen::MatrixXcd v;
};

// Per-user QoS derived from a common rate target gamma [bits/s/Hz]:
// theta_k = 2^(gamma/omega_k) - 1, beta_k = sqrt(1 + 1/theta_k).
struct QosTarget {
  double gamma = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd beta;

  static QosTarget make(double gamma, const Eigen::VectorXd& weights);
};

double sinr(const BeamformerSet& v, const ChannelRealization& h, int user,
            const NetworkConfig& config);
double min_weighted_rate(const BeamformerSet& v, const ChannelRealization& h,
                         const NetworkConfig& config);

Eigen::VectorXd per_ap_powers(const BeamformerSet& v, const NetworkConfig& config);
double watts_to_dbm(double watts);

struct ValidationReport {
  bool ok = false;
  double worst_power_ratio = 0.0;  // max_l sum_k ||v_lk||^2 / P_l
  double worst_sinr_ratio = 0.0;   // min_k sinr_k / theta_k
};

ValidationReport validate_solution(const BeamformerSet& v, const ChannelRealization& h,
                                   const NetworkConfig& config, const QosTarget& qos,
                                   double tol = 1e-3);

// Template + problem pair owned by one bisection run; stuffing mutates the
// problem in place between solves.
struct ConicWorkspace {
  StuffingTemplate tmpl;
  ConicProblem prob;
};

ConicWorkspace make_workspace(const NetworkConfig& config);

enum class FeasibilityStatus { Feasible, Infeasible, Inconclusive };

struct FeasibilityOutcome {
  FeasibilityStatus status = FeasibilityStatus::Inconclusive;
  BeamformerSet beams;
  double total_power_w = 0.0;
  double objective_dbm = 0.0;  // 10 log10(1000 ||v||^2)
  bool validated = false;
  SolveResult solve;
};

// Solves the fixed-target power-minimization problem by stuffing the
// workspace and running the conic solver. Optimal solves are validated
// against the original SINR/power constraints before being reported
// Feasible; MaxIterReached surfaces as Inconclusive.
FeasibilityOutcome feasibility_solve(double gamma, const ChannelRealization& h,
                                     const NetworkConfig& config, ConicWorkspace& ws,
                                     const SolverSettings& settings);

BeamformerSet extract_beamformers(const Eigen::VectorXd& primal,
                                  const StuffingTemplate& tmpl);

struct MaxMinResult {
  double gamma_star = 0.0;
  BeamformerSet beams;
  double gamma_max = 0.0;
  bool gamma_max_feasible = false;  // upper bound itself was feasible
  int bisection_steps = 0;          // solves inside the bisection loop
  int inconclusive_count = 0;       // solver-inconclusive verdicts treated as infeasible
  long long admm_iterations = 0;
  std::vector<std::pair<double, bool>> trace;  // (gamma, feasible) per solve
};

// Bisection on the rate target: feasible targets raise the lower bound,
// infeasible ones lower the upper bound, until the bracket is below eps_rate.
MaxMinResult max_min_bisection(const ChannelRealization& h, const NetworkConfig& config,
                               const SolverSettings& settings, double eps_rate = 0.01);

struct ZfResult {
  bool applicable = false;  // requires N >= K
  double min_rate = 0.0;
  BeamformerSet beams;
};

// Zero-forcing baseline: normalized pseudo-inverse directions with one
// common amplitude fitted to the tightest per-AP budget.
ZfResult zf_baseline(const ChannelRealization& h, const NetworkConfig& config);

// Interference-free full-power upper bound on the achievable rate target:
// min_k omega_k log2(1 + (sum_l sqrt(P_l) ||h_kl||)^2 / sigma_k^2).
double gamma_max_default(const ChannelRealization& h, const NetworkConfig& config);

}  // namespace cbf
