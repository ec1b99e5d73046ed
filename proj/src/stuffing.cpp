#include "cbf/stuffing.hpp"

#include <cmath>

#include "cbf/errors.hpp"

namespace cbf {

namespace {

// Row offsets of the stacked constraint blocks, in order: L power scalar
// rows, K QoS scalar rows, the objective SOC, L per-AP SOCs, K QoS SOCs.
struct RowLayout {
  Eigen::Index obj_head = 0;
  std::vector<Eigen::Index> ap_head;
  std::vector<Eigen::Index> qos_head;
};

RowLayout make_row_layout(const ProblemDims& d) {
  const int ff = d.field_factor();
  RowLayout r;
  r.obj_head = d.num_aps + d.num_users;
  Eigen::Index next = r.obj_head + d.beam_len + 1;
  r.ap_head.reserve(d.num_aps);
  for (int l = 0; l < d.num_aps; ++l) {
    r.ap_head.push_back(next);
    next += static_cast<Eigen::Index>(d.num_users) * d.ap_antennas[l] * ff + 1;
  }
  r.qos_head.reserve(d.num_users);
  for (int k = 0; k < d.num_users; ++k) {
    r.qos_head.push_back(next);
    next += static_cast<Eigen::Index>(d.num_users) * ff + 2;
  }
  return r;
}

VariableLayout make_variable_layout(const ProblemDims& d) {
  VariableLayout v;
  v.x0 = 0;
  v.y0_start = 1;
  v.t0_start = 1 + d.num_aps;
  v.v_start = 1 + d.num_aps + d.num_users;
  v.v_len = d.beam_len;
  return v;
}

std::vector<Eigen::Index> antenna_offsets(const ProblemDims& d) {
  std::vector<Eigen::Index> off(d.num_aps, 0);
  for (int l = 1; l < d.num_aps; ++l) off[l] = off[l - 1] + d.ap_antennas[l - 1];
  return off;
}

// Coefficient j of the real selector for Re(h^H v_k): [Re h; Im h] in
// complex mode, h itself in real mode.
inline double r_coef(const Eigen::VectorXd& hre, const Eigen::VectorXd& him,
                     bool complex_mode, Eigen::Index n, Eigen::Index j) {
  if (!complex_mode) return hre(j);
  return j < n ? hre(j) : him(j - n);
}

// Entry (sub-row p, column component j) of the per-interferer channel block.
// Complex mode: p = 0 is the Re(h^H v_i) row, p = 1 the Im(h^H v_i) row.
inline double channel_block_coef(const Eigen::VectorXd& hre, const Eigen::VectorXd& him,
                                 bool complex_mode, Eigen::Index n, int p,
                                 Eigen::Index j) {
  if (!complex_mode) return hre(j);
  if (p == 0) return j < n ? hre(j) : him(j - n);
  return j < n ? -him(j) : hre(j - n);
}

ConeProduct make_cone(const ProblemDims& d) {
  const int ff = d.field_factor();
  std::vector<ConeFactor> f;
  f.reserve(2 * (d.num_aps + d.num_users) + 1);
  for (int i = 0; i < d.num_aps + d.num_users; ++i)
    f.push_back({ConeKind::Nonneg, 1});
  f.push_back({ConeKind::SecondOrder, d.beam_len + 1});
  for (int l = 0; l < d.num_aps; ++l)
    f.push_back({ConeKind::SecondOrder,
                 static_cast<Eigen::Index>(d.num_users) * d.ap_antennas[l] * ff + 1});
  for (int k = 0; k < d.num_users; ++k)
    f.push_back({ConeKind::SecondOrder, static_cast<Eigen::Index>(d.num_users) * ff + 2});
  return ConeProduct(std::move(f));
}

void check_params(const ProblemDims& d, const Eigen::MatrixXcd& channels,
                  const Eigen::VectorXd& powers, const Eigen::VectorXd& noise_sigma,
                  const Eigen::VectorXd& weights, double gamma) {
  if (gamma <= 0.0) throw ConfigError("rate target gamma must be positive");
  if (channels.rows() != d.total_antennas || channels.cols() != d.num_users)
    throw DimensionError("channel matrix must be N x K");
  if (powers.size() != d.num_aps) throw DimensionError("need one power budget per AP");
  if (noise_sigma.size() != d.num_users)
    throw DimensionError("need one noise level per user");
  if (weights.size() != d.num_users) throw DimensionError("need one weight per user");
  if ((powers.array() < 0.0).any()) throw ConfigError("power budgets must be nonnegative");
  if ((weights.array() <= 0.0).any()) throw ConfigError("weights must be positive");
  if (d.field_mode == FieldMode::Real && channels.imag().cwiseAbs().sum() != 0.0)
    throw ConfigError("complex channels require complex mode");
}

}  // namespace

Eigen::VectorXd qos_thresholds(double gamma, const Eigen::VectorXd& weights) {
  return weights.unaryExpr([gamma](double w) { return std::exp2(gamma / w) - 1.0; });
}

Eigen::VectorXd qos_cone_gains(const Eigen::VectorXd& thresholds) {
  return (1.0 + 1.0 / thresholds.array()).sqrt();
}

EmbeddedChannel embed_complex(const Eigen::VectorXcd& h) {
  const Eigen::Index n = h.size();
  EmbeddedChannel e;
  e.selector.resize(2 * n);
  e.selector << h.real(), h.imag();
  e.pair_rows.resize(2, 2 * n);
  e.pair_rows.row(0) << h.real().transpose(), h.imag().transpose();
  e.pair_rows.row(1) << -h.imag().transpose(), h.real().transpose();
  return e;
}

std::vector<EmbeddedChannel> embed_complex(const Eigen::MatrixXcd& channels) {
  std::vector<EmbeddedChannel> out;
  out.reserve(channels.cols());
  for (Eigen::Index k = 0; k < channels.cols(); ++k)
    out.push_back(embed_complex(Eigen::VectorXcd(channels.col(k))));
  return out;
}

std::pair<StuffingTemplate, ConicProblem> build_template(const ProblemDims& dims) {
  const int L = dims.num_aps, K = dims.num_users, ff = dims.field_factor();
  const Eigen::Index N = dims.total_antennas, Nff = N * ff, M = dims.beam_len;
  const RowLayout rows = make_row_layout(dims);
  const VariableLayout vars = make_variable_layout(dims);
  const auto antoff = antenna_offsets(dims);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> beta_r_pos(K), gain_pos(K);

  for (int l = 0; l < L; ++l) trip.emplace_back(l, vars.y0_start + l, 1.0);
  for (int k = 0; k < K; ++k) {
    trip.emplace_back(L + k, vars.t0_start + k, 1.0);
    const Eigen::Index blk = vars.user_block(k, dims);
    for (Eigen::Index j = 0; j < Nff; ++j) {
      trip.emplace_back(L + k, blk + j, 0.0);
      beta_r_pos[k].emplace_back(L + k, blk + j);
    }
  }

  trip.emplace_back(rows.obj_head, vars.x0, -1.0);
  for (Eigen::Index j = 0; j < M; ++j)
    trip.emplace_back(rows.obj_head + 1 + j, vars.v_start + j, -1.0);

  for (int l = 0; l < L; ++l) {
    trip.emplace_back(rows.ap_head[l], vars.y0_start + l, -1.0);
    const int nl = dims.ap_antennas[l];
    for (int k = 0; k < K; ++k)
      for (int p = 0; p < ff; ++p)
        for (int a = 0; a < nl; ++a) {
          const Eigen::Index row = rows.ap_head[l] + 1 + (static_cast<Eigen::Index>(k) * ff + p) * nl + a;
          const Eigen::Index col = vars.user_block(k, dims) + p * N + antoff[l] + a;
          trip.emplace_back(row, col, -1.0);
        }
  }

  for (int k = 0; k < K; ++k) {
    trip.emplace_back(rows.qos_head[k], vars.t0_start + k, -1.0);
    for (int i = 0; i < K; ++i)
      for (int p = 0; p < ff; ++p) {
        const Eigen::Index row = rows.qos_head[k] + 1 + static_cast<Eigen::Index>(i) * ff + p;
        for (Eigen::Index j = 0; j < Nff; ++j) {
          const Eigen::Index col = vars.user_block(i, dims) + j;
          trip.emplace_back(row, col, 0.0);
          gain_pos[k].emplace_back(row, col);
        }
      }
    // the trailing row of the block carries only sigma_k on the b side
  }

  ConicProblem prob;
  prob.A = SparseMatrix(dims.num_rows, dims.num_vars, trip);
  prob.b = Eigen::VectorXd::Zero(dims.num_rows);
  prob.c = Eigen::VectorXd::Zero(dims.num_vars);
  prob.c(0) = 1.0;
  prob.cone = make_cone(dims);
  prob.dims = dims;

  StuffingTemplate tmpl;
  tmpl.dims = dims;
  tmpl.layout = vars;
  tmpl.power_slots.reserve(L);
  for (int l = 0; l < L; ++l) tmpl.power_slots.push_back(l);
  tmpl.sigma_slots.reserve(K);
  for (int k = 0; k < K; ++k)
    tmpl.sigma_slots.push_back(rows.qos_head[k] + 1 + static_cast<Eigen::Index>(K) * ff);
  tmpl.beta_r_slots.resize(K);
  tmpl.gain_slots.resize(K);
  for (int k = 0; k < K; ++k) {
    tmpl.beta_r_slots[k].reserve(beta_r_pos[k].size());
    for (auto [r, c] : beta_r_pos[k]) tmpl.beta_r_slots[k].push_back(prob.A.value_slot(r, c));
    tmpl.gain_slots[k].reserve(gain_pos[k].size());
    for (auto [r, c] : gain_pos[k]) tmpl.gain_slots[k].push_back(prob.A.value_slot(r, c));
  }
  return {std::move(tmpl), std::move(prob)};
}

void stuff(const StuffingTemplate& tmpl, ConicProblem& prob,
           const Eigen::MatrixXcd& channels, const Eigen::VectorXd& powers,
           const Eigen::VectorXd& noise_sigma, const Eigen::VectorXd& weights,
           double gamma) {
  const ProblemDims& d = tmpl.dims;
  check_params(d, channels, powers, noise_sigma, weights, gamma);
  if (!prob.dims || prob.dims->num_rows != d.num_rows || prob.dims->num_vars != d.num_vars)
    throw DimensionError("problem was not built from this template's dims");

  const bool cx = d.field_mode == FieldMode::Complex;
  const int K = d.num_users, ff = d.field_factor();
  const Eigen::Index N = d.total_antennas, Nff = N * ff;
  const Eigen::VectorXd beta = qos_cone_gains(qos_thresholds(gamma, weights));

  for (int l = 0; l < d.num_aps; ++l)
    prob.b(tmpl.power_slots[l]) = std::sqrt(powers(l));
  for (int k = 0; k < K; ++k) prob.b(tmpl.sigma_slots[k]) = noise_sigma(k);

  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd hre = channels.col(k).real();
    const Eigen::VectorXd him = channels.col(k).imag();
    const auto& rslots = tmpl.beta_r_slots[k];
    for (Eigen::Index j = 0; j < Nff; ++j)
      prob.A.set_value(rslots[j], -(beta(k) * r_coef(hre, him, cx, N, j)));
    const auto& gslots = tmpl.gain_slots[k];
    Eigen::Index s = 0;
    for (int i = 0; i < K; ++i)
      for (int p = 0; p < ff; ++p)
        for (Eigen::Index j = 0; j < Nff; ++j)
          prob.A.set_value(gslots[s++], -channel_block_coef(hre, him, cx, N, p, j));
  }
  prob.bump_version();
}

ConicProblem build_from_scratch(const ProblemDims& dims, const Eigen::MatrixXcd& channels,
                                const Eigen::VectorXd& powers,
                                const Eigen::VectorXd& noise_sigma,
                                const Eigen::VectorXd& weights, double gamma) {
  check_params(dims, channels, powers, noise_sigma, weights, gamma);
  const int L = dims.num_aps, K = dims.num_users, ff = dims.field_factor();
  const bool cx = dims.field_mode == FieldMode::Complex;
  const Eigen::Index N = dims.total_antennas, Nff = N * ff, M = dims.beam_len;
  const RowLayout rows = make_row_layout(dims);
  const VariableLayout vars = make_variable_layout(dims);
  const auto antoff = antenna_offsets(dims);
  const Eigen::VectorXd beta = qos_cone_gains(qos_thresholds(gamma, weights));

  std::vector<Eigen::Triplet<double>> trip;
  for (int l = 0; l < L; ++l) trip.emplace_back(l, vars.y0_start + l, 1.0);
  for (int k = 0; k < K; ++k) {
    trip.emplace_back(L + k, vars.t0_start + k, 1.0);
    const Eigen::VectorXd hre = channels.col(k).real();
    const Eigen::VectorXd him = channels.col(k).imag();
    const Eigen::Index blk = vars.user_block(k, dims);
    for (Eigen::Index j = 0; j < Nff; ++j)
      trip.emplace_back(L + k, blk + j, -(beta(k) * r_coef(hre, him, cx, N, j)));
  }

  trip.emplace_back(rows.obj_head, vars.x0, -1.0);
  for (Eigen::Index j = 0; j < M; ++j)
    trip.emplace_back(rows.obj_head + 1 + j, vars.v_start + j, -1.0);

  for (int l = 0; l < L; ++l) {
    trip.emplace_back(rows.ap_head[l], vars.y0_start + l, -1.0);
    const int nl = dims.ap_antennas[l];
    for (int k = 0; k < K; ++k)
      for (int p = 0; p < ff; ++p)
        for (int a = 0; a < nl; ++a) {
          const Eigen::Index row = rows.ap_head[l] + 1 + (static_cast<Eigen::Index>(k) * ff + p) * nl + a;
          const Eigen::Index col = vars.user_block(k, dims) + p * N + antoff[l] + a;
          trip.emplace_back(row, col, -1.0);
        }
  }

  for (int k = 0; k < K; ++k) {
    trip.emplace_back(rows.qos_head[k], vars.t0_start + k, -1.0);
    const Eigen::VectorXd hre = channels.col(k).real();
    const Eigen::VectorXd him = channels.col(k).imag();
    for (int i = 0; i < K; ++i)
      for (int p = 0; p < ff; ++p) {
        const Eigen::Index row = rows.qos_head[k] + 1 + static_cast<Eigen::Index>(i) * ff + p;
        for (Eigen::Index j = 0; j < Nff; ++j)
          trip.emplace_back(row, vars.user_block(i, dims) + j,
                            -channel_block_coef(hre, him, cx, N, p, j));
      }
  }

  ConicProblem prob;
  prob.A = SparseMatrix(dims.num_rows, dims.num_vars, trip);
  prob.b = Eigen::VectorXd::Zero(dims.num_rows);
  for (int l = 0; l < L; ++l) prob.b(l) = std::sqrt(powers(l));
  for (int k = 0; k < K; ++k)
    prob.b(rows.qos_head[k] + 1 + static_cast<Eigen::Index>(K) * ff) = noise_sigma(k);
  prob.c = Eigen::VectorXd::Zero(dims.num_vars);
  prob.c(0) = 1.0;
  prob.cone = make_cone(dims);
  prob.dims = dims;
  return prob;
}

}  // namespace cbf
