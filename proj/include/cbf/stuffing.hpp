#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cbf/problem.hpp"

namespace cbf {

// Offsets of the canonical variable stacking [x0; y0_1..y0_L; t0_1..t0_K; v].
struct VariableLayout {
  Eigen::Index x0 = 0;
  Eigen::Index y0_start = 0;  // L entries
  Eigen::Index t0_start = 0;  // K entries
  Eigen::Index v_start = 0;   // M entries
  Eigen::Index v_len = 0;

  // v-block of user k (length N*field_factor)
  Eigen::Index user_block(int k, const ProblemDims& d) const {
    return v_start + static_cast<Eigen::Index>(k) * d.total_antennas * d.field_factor();
  }
};

// Fixed sparsity skeleton of the canonical problem plus index maps from
// network parameters to value slots, so refreshing a problem for new
// channels/powers/targets is pure memory writes.
struct StuffingTemplate {
  ProblemDims dims;
  VariableLayout layout;
  std::vector<Eigen::Index> power_slots;               // into b, one per AP
  std::vector<Eigen::Index> sigma_slots;               // into b, one per user
  std::vector<std::vector<Eigen::Index>> beta_r_slots; // per user, into A values
  std::vector<std::vector<Eigen::Index>> gain_slots;   // per user, into A values
};

// Real embedding of one complex channel vector h (length N):
//   selector    = [Re h; Im h]         picks Re(h^H v) from [Re v; Im v]
//   pair_rows   = [ Re h'  Im h' ]     maps [Re v; Im v] to
//                 [-Im h'  Re h' ]     (Re(h^H v), Im(h^H v))
// so |h^H v|^2 equals the squared norm of pair_rows * [Re v; Im v].
struct EmbeddedChannel {
  Eigen::VectorXd selector;      // 2N
  Eigen::MatrixXd pair_rows;     // 2 x 2N
};

EmbeddedChannel embed_complex(const Eigen::VectorXcd& h);
std::vector<EmbeddedChannel> embed_complex(const Eigen::MatrixXcd& channels);

// Offline template generation. The returned problem has all structural
// entries finalized and parameter slots holding zeros.
std::pair<StuffingTemplate, ConicProblem> build_template(const ProblemDims& dims);

// In-place parameter refresh: writes sqrt(P_l) and sigma_k into b and the
// channel/target-dependent blocks into A. The sparsity pattern is untouched.
// channels is N x K (column k = stacked channel of user k); real mode
// requires a zero imaginary part. gamma is the per-user rate target.
void stuff(const StuffingTemplate& tmpl, ConicProblem& prob,
           const Eigen::MatrixXcd& channels, const Eigen::VectorXd& powers,
           const Eigen::VectorXd& noise_sigma, const Eigen::VectorXd& weights,
           double gamma);

// Reference path: assembles the full problem from scratch for the given
// parameters (structure generation included). Entrywise identical to
// build_template + stuff; used as the stuffing oracle and timing baseline.
ConicProblem build_from_scratch(const ProblemDims& dims, const Eigen::MatrixXcd& channels,
                                const Eigen::VectorXd& powers,
                                const Eigen::VectorXd& noise_sigma,
                                const Eigen::VectorXd& weights, double gamma);

// theta_k = 2^(gamma/w_k) - 1 and beta_k = sqrt(1 + 1/theta_k).
Eigen::VectorXd qos_thresholds(double gamma, const Eigen::VectorXd& weights);
Eigen::VectorXd qos_cone_gains(const Eigen::VectorXd& thresholds);

}  // namespace cbf
