#include "cbf/beamforming.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>

#include "cbf/errors.hpp"

namespace cbf {

int NetworkConfig::total_antennas() const {
  int n = 0;
  for (int nl : ap_antennas) n += nl;
  return n;
}

void NetworkConfig::validate() const {
  if (num_aps < 1 || num_users < 1) throw ConfigError("need at least one AP and one user");
  if (static_cast<int>(ap_antennas.size()) != num_aps)
    throw ConfigError("antenna list length does not match AP count");
  if (power_budgets.size() != num_aps) throw ConfigError("need one power budget per AP");
  if (noise_powers.size() != num_users) throw ConfigError("need one noise power per user");
  if (weights.size() != num_users) throw ConfigError("need one weight per user");
  if ((power_budgets.array() <= 0.0).any()) throw ConfigError("power budgets must be positive");
  if ((noise_powers.array() <= 0.0).any()) throw ConfigError("noise powers must be positive");
  if ((weights.array() <= 0.0).any()) throw ConfigError("weights must be positive");
}

ProblemDims NetworkConfig::dims() const {
  return compute_dims(num_aps, num_users, ap_antennas, field_mode);
}

QosTarget QosTarget::make(double gamma, const Eigen::VectorXd& weights) {
  if (gamma <= 0.0) throw ConfigError("rate target gamma must be positive");
  QosTarget q;
  q.gamma = gamma;
  q.theta = qos_thresholds(gamma, weights);
  q.beta = qos_cone_gains(q.theta);
  return q;
}

namespace {

std::vector<int> antenna_offsets(const NetworkConfig& c) {
  std::vector<int> off(c.num_aps, 0);
  for (int l = 1; l < c.num_aps; ++l) off[l] = off[l - 1] + c.ap_antennas[l - 1];
  return off;
}

void check_channel(const ChannelRealization& h, const NetworkConfig& c) {
  if (h.h.rows() != c.total_antennas() || h.h.cols() != c.num_users)
    throw DimensionError("channel matrix must be N x K");
}

}  // namespace

double sinr(const BeamformerSet& v, const ChannelRealization& h, int user,
            const NetworkConfig& config) {
  check_channel(h, config);
  const Eigen::VectorXcd rx = v.v.adjoint() * h.h.col(user);  // rx(i) = v_i^H h_k
  const double signal = std::norm(rx(user));
  double interference = 0.0;
  for (Eigen::Index i = 0; i < rx.size(); ++i)
    if (i != user) interference += std::norm(rx(i));
  return signal / (interference + config.noise_powers(user));
}

double min_weighted_rate(const BeamformerSet& v, const ChannelRealization& h,
                         const NetworkConfig& config) {
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.num_users; ++k)
    worst = std::min(worst, config.weights(k) * std::log2(1.0 + sinr(v, h, k, config)));
  return worst;
}

Eigen::VectorXd per_ap_powers(const BeamformerSet& v, const NetworkConfig& config) {
  const auto off = antenna_offsets(config);
  Eigen::VectorXd p(config.num_aps);
  for (int l = 0; l < config.num_aps; ++l)
    p(l) = v.v.middleRows(off[l], config.ap_antennas[l]).squaredNorm();
  return p;
}

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }

ValidationReport validate_solution(const BeamformerSet& v, const ChannelRealization& h,
                                   const NetworkConfig& config, const QosTarget& qos,
                                   double tol) {
  ValidationReport r;
  const Eigen::VectorXd powers = per_ap_powers(v, config);
  r.worst_power_ratio = (powers.array() / config.power_budgets.array()).maxCoeff();
  r.worst_sinr_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.num_users; ++k)
    r.worst_sinr_ratio = std::min(r.worst_sinr_ratio, sinr(v, h, k, config) / qos.theta(k));
  r.ok = r.worst_power_ratio <= 1.0 + tol && r.worst_sinr_ratio >= 1.0 - tol;
  return r;
}

ConicWorkspace make_workspace(const NetworkConfig& config) {
  config.validate();
  auto [tmpl, prob] = build_template(config.dims());
  return {std::move(tmpl), std::move(prob)};
}

BeamformerSet extract_beamformers(const Eigen::VectorXd& primal,
                                  const StuffingTemplate& tmpl) {
  const ProblemDims& d = tmpl.dims;
  if (primal.size() != d.num_vars)
    throw DimensionError("primal vector does not match template dims");
  const Eigen::Index n_ant = d.total_antennas;
  BeamformerSet out;
  out.v.resize(n_ant, d.num_users);
  for (int k = 0; k < d.num_users; ++k) {
    const Eigen::Index blk = tmpl.layout.user_block(k, d);
    if (d.field_mode == FieldMode::Complex) {
      out.v.col(k).real() = primal.segment(blk, n_ant);
      out.v.col(k).imag() = primal.segment(blk + n_ant, n_ant);
    } else {
      out.v.col(k).real() = primal.segment(blk, n_ant);
      out.v.col(k).imag().setZero();
    }
  }
  return out;
}

FeasibilityOutcome feasibility_solve(double gamma, const ChannelRealization& h,
                                     const NetworkConfig& config, ConicWorkspace& ws,
                                     const SolverSettings& settings) {
  config.validate();
  check_channel(h, config);

  // The QoS constraint of user k is invariant under scaling (h_k, sigma_k)
  // by 1/sigma_k, and v is unchanged by it. Stuffing the noise-normalized
  // parameters keeps every channel block at unit scale, where the solver's
  // relative termination criteria are meaningful even for physical units
  // spanning many orders of magnitude.
  const Eigen::VectorXd sigma = config.noise_powers.cwiseSqrt();
  Eigen::MatrixXcd scaled_h = h.h;
  for (int k = 0; k < config.num_users; ++k) scaled_h.col(k) /= sigma(k);
  stuff(ws.tmpl, ws.prob, scaled_h, config.power_budgets,
        Eigen::VectorXd::Ones(config.num_users), config.weights, gamma);

  FeasibilityOutcome out;
  out.solve = solve_conic(ws.prob, settings);
  switch (out.solve.status) {
    case SolveStatus::Optimal: {
      out.beams = extract_beamformers(out.solve.primal, ws.tmpl);
      out.total_power_w = out.beams.v.squaredNorm();
      out.objective_dbm = watts_to_dbm(out.total_power_w);
      const auto report =
          validate_solution(out.beams, h, config, QosTarget::make(gamma, config.weights));
      out.validated = report.ok;
      out.status = report.ok ? FeasibilityStatus::Feasible : FeasibilityStatus::Inconclusive;
      break;
    }
    case SolveStatus::PrimalInfeasible:
      out.status = FeasibilityStatus::Infeasible;
      break;
    default:
      out.status = FeasibilityStatus::Inconclusive;
      break;
  }
  return out;
}

MaxMinResult max_min_bisection(const ChannelRealization& h, const NetworkConfig& config,
                               const SolverSettings& settings, double eps_rate) {
  config.validate();
  check_channel(h, config);
  if (eps_rate <= 0.0) throw ConfigError("eps_rate must be positive");

  MaxMinResult r;
  r.beams.v = Eigen::MatrixXcd::Zero(config.total_antennas(), config.num_users);
  r.gamma_max = gamma_max_default(h, config);
  if (r.gamma_max <= 0.0) return r;  // dead channels: rate 0 with zero beams

  ConicWorkspace ws = make_workspace(config);
  auto probe = [&](double gamma) {
    FeasibilityOutcome out = feasibility_solve(gamma, h, config, ws, settings);
    r.admm_iterations += out.solve.iterations;
    const bool feasible = out.status == FeasibilityStatus::Feasible;
    if (out.status == FeasibilityStatus::Inconclusive) ++r.inconclusive_count;
    r.trace.emplace_back(gamma, feasible);
    if (feasible) {
      r.gamma_star = gamma;
      r.beams = std::move(out.beams);
    }
    return feasible;
  };

  if (probe(r.gamma_max)) {
    r.gamma_max_feasible = true;
    return r;
  }

  double lo = 0.0, hi = r.gamma_max;
  while (hi - lo >= eps_rate) {
    const double mid = 0.5 * (lo + hi);
    ++r.bisection_steps;
    if (probe(mid))
      lo = mid;
    else
      hi = mid;
  }
  r.gamma_star = lo;
  return r;
}

ZfResult zf_baseline(const ChannelRealization& h, const NetworkConfig& config) {
  config.validate();
  check_channel(h, config);
  const int n_ant = config.total_antennas(), K = config.num_users;

  ZfResult r;
  if (n_ant < K) return r;  // not applicable, reported as such
  r.applicable = true;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(h.h);
  if (qr.rank() < K)
    throw DegenerateChannelError("channel matrix is rank deficient; zero-forcing undefined");

  // Directions: columns of H (H^H H)^{-1}, so h_k^H w_j = delta_kj.
  const Eigen::MatrixXcd gram = h.h.adjoint() * h.h;
  Eigen::MatrixXcd dirs = h.h * gram.ldlt().solve(Eigen::MatrixXcd::Identity(K, K));
  for (int k = 0; k < K; ++k) dirs.col(k) /= dirs.col(k).norm();

  // Common amplitude limited by the tightest per-AP budget.
  const auto off = antenna_offsets(config);
  double t = std::numeric_limits<double>::infinity();
  for (int l = 0; l < config.num_aps; ++l) {
    const double used = dirs.middleRows(off[l], config.ap_antennas[l]).squaredNorm();
    if (used > 1e-300) t = std::min(t, std::sqrt(config.power_budgets(l) / used));
  }
  if (!std::isfinite(t)) t = 0.0;

  r.beams.v = t * dirs;
  r.min_rate = min_weighted_rate(r.beams, h, config);
  return r;
}

double gamma_max_default(const ChannelRealization& h, const NetworkConfig& config) {
  config.validate();
  check_channel(h, config);
  const auto off = antenna_offsets(config);
  double bound = std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.num_users; ++k) {
    double amp = 0.0;
    for (int l = 0; l < config.num_aps; ++l)
      amp += std::sqrt(config.power_budgets(l)) *
             h.h.col(k).segment(off[l], config.ap_antennas[l]).norm();
    const double rate =
        config.weights(k) * std::log2(1.0 + amp * amp / config.noise_powers(k));
    bound = std::min(bound, rate);
  }
  return bound;
}

}  // namespace cbf
