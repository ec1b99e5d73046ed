#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cbf/cones.hpp"

namespace cbf {

enum class FieldMode { Real, Complex };

// Sparse matrix in compressed-column storage with an immutable sparsity
// pattern. Entries are addressed by a stable "value slot" (index into the
// compressed value array) so parameter updates are plain memory writes.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Eigen::Index rows, Eigen::Index cols,
               const std::vector<Eigen::Triplet<double>>& entries);

  Eigen::Index rows() const { return mat_.rows(); }
  Eigen::Index cols() const { return mat_.cols(); }
  Eigen::Index nonzeros() const { return mat_.nonZeros(); }

  // Slot of an existing entry; throws DimensionError if (row, col) is not
  // part of the pattern.
  Eigen::Index value_slot(Eigen::Index row, Eigen::Index col) const;

  double value(Eigen::Index slot) const { return mat_.valuePtr()[slot]; }
  void set_value(Eigen::Index slot, double v) { mat_.valuePtr()[slot] = v; }

  double coeff(Eigen::Index row, Eigen::Index col) const { return mat_.coeff(row, col); }

  const Eigen::SparseMatrix<double>& eigen() const { return mat_; }

  template <typename Fn>  // fn(row, col, value), CSC order
  void for_each_entry(Fn&& fn) const {
    for (int j = 0; j < mat_.outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, j); it; ++it)
        fn(it.row(), it.col(), it.value());
  }

 private:
  Eigen::SparseMatrix<double> mat_;
};

// Sizes of the canonical beamforming problem. Real mode stacks beamformers
// directly; complex mode stacks [Re; Im] per user, doubling the lengths.
struct ProblemDims {
  int num_aps = 0;                // L
  int num_users = 0;              // K
  std::vector<int> ap_antennas;   // N_l
  FieldMode field_mode = FieldMode::Real;
  int total_antennas = 0;         // N = sum N_l
  Eigen::Index beam_len = 0;      // M = K*N (real) or 2*K*N (complex)
  Eigen::Index num_vars = 0;      // n = 1 + L + K + M
  Eigen::Index num_rows = 0;      // m

  int field_factor() const { return field_mode == FieldMode::Complex ? 2 : 1; }
};

ProblemDims compute_dims(int num_aps, int num_users, std::span<const int> ap_antennas,
                         FieldMode mode);

// Standard-form conic problem: minimize c'v subject to A*v + s = b with the
// slack s constrained to `cone`. `version` is bumped by every value update
// so solvers can invalidate cached factorizations.
struct ConicProblem {
  SparseMatrix A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  ConeProduct cone;
  std::optional<ProblemDims> dims;  // set for problems built by the templater
  std::uint64_t version = 1;

  Eigen::Index num_vars() const { return c.size(); }
  Eigen::Index num_rows() const { return b.size(); }
  void bump_version() { ++version; }
};

// Plain-text debug dump (dims header, CSC triplets, b, c, cone list); used
// for golden comparisons in tests.
void dump_problem(const ConicProblem& p, std::ostream& os);

// Exact equality of pattern, values, b, c, and cone (version ignored).
bool equal_data(const ConicProblem& a, const ConicProblem& b);

}  // namespace cbf
