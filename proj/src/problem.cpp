#include "cbf/problem.hpp"

#include <cstdio>
#include <ostream>

#include "cbf/errors.hpp"

namespace cbf {

SparseMatrix::SparseMatrix(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Eigen::Triplet<double>>& entries)
    : mat_(rows, cols) {
  for (const auto& t : entries) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
      throw DimensionError("sparse entry (" + std::to_string(t.row()) + "," +
                           std::to_string(t.col()) + ") out of bounds");
  }
  mat_.setFromTriplets(entries.begin(), entries.end());
  if (mat_.nonZeros() != static_cast<Eigen::Index>(entries.size()))
    throw ConfigError("duplicate (row, col) pairs in sparse pattern");
  mat_.makeCompressed();
}

Eigen::Index SparseMatrix::value_slot(Eigen::Index row, Eigen::Index col) const {
  const auto* outer = mat_.outerIndexPtr();
  const auto* inner = mat_.innerIndexPtr();
  // inner indices within a compressed column are sorted: binary search.
  Eigen::Index lo = outer[col], hi = outer[col + 1] - 1;
  while (lo <= hi) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (inner[mid] == row) return mid;
    if (inner[mid] < row)
      lo = mid + 1;
    else
      hi = mid - 1;
  }
  throw DimensionError("no entry at (" + std::to_string(row) + "," +
                       std::to_string(col) + ") in sparse pattern");
}

ProblemDims compute_dims(int num_aps, int num_users, std::span<const int> ap_antennas,
                         FieldMode mode) {
  if (num_aps < 1 || num_users < 1)
    throw ConfigError("need at least one AP and one user");
  if (static_cast<int>(ap_antennas.size()) != num_aps)
    throw ConfigError("antenna list length does not match AP count");

  ProblemDims d;
  d.num_aps = num_aps;
  d.num_users = num_users;
  d.field_mode = mode;
  d.ap_antennas.assign(ap_antennas.begin(), ap_antennas.end());
  for (int nl : d.ap_antennas) {
    if (nl < 1) throw ConfigError("every AP needs at least one antenna");
    d.total_antennas += nl;
  }

  const int ff = d.field_factor();
  d.beam_len = static_cast<Eigen::Index>(num_users) * d.total_antennas * ff;
  d.num_vars = 1 + num_aps + num_users + d.beam_len;

  // rows: L + K scalar rows, the objective SOC, one SOC per AP, one per user
  Eigen::Index m = num_aps + num_users + (d.beam_len + 1);
  for (int nl : d.ap_antennas) m += static_cast<Eigen::Index>(num_users) * nl * ff + 1;
  m += static_cast<Eigen::Index>(num_users) * (num_users * ff + 2);
  d.num_rows = m;
  return d;
}

bool equal_data(const ConicProblem& a, const ConicProblem& b) {
  if (a.num_rows() != b.num_rows() || a.num_vars() != b.num_vars()) return false;
  const auto& ma = a.A.eigen();
  const auto& mb = b.A.eigen();
  if (ma.nonZeros() != mb.nonZeros()) return false;
  for (Eigen::Index j = 0; j <= ma.cols(); ++j)
    if (ma.outerIndexPtr()[j] != mb.outerIndexPtr()[j]) return false;
  for (Eigen::Index i = 0; i < ma.nonZeros(); ++i)
    if (ma.innerIndexPtr()[i] != mb.innerIndexPtr()[i] ||
        ma.valuePtr()[i] != mb.valuePtr()[i])
      return false;
  if (a.b != b.b || a.c != b.c) return false;
  if (a.cone.num_factors() != b.cone.num_factors()) return false;
  for (std::size_t i = 0; i < a.cone.num_factors(); ++i) {
    const auto& fa = a.cone.factors()[i];
    const auto& fb = b.cone.factors()[i];
    if (fa.kind != fb.kind || fa.dim != fb.dim) return false;
  }
  return true;
}

void dump_problem(const ConicProblem& p, std::ostream& os) {
  char buf[64];
  os << "dims " << p.num_rows() << " " << p.num_vars() << "\n";
  if (p.dims) {
    os << "net L=" << p.dims->num_aps << " K=" << p.dims->num_users << " mode="
       << (p.dims->field_mode == FieldMode::Complex ? "complex" : "real") << " N=[";
    for (std::size_t i = 0; i < p.dims->ap_antennas.size(); ++i)
      os << (i ? "," : "") << p.dims->ap_antennas[i];
    os << "]\n";
  }
  os << "A " << p.A.nonzeros() << "\n";
  p.A.for_each_entry([&](Eigen::Index r, Eigen::Index c, double v) {
    std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(r),
                  static_cast<long>(c), v);
    os << buf;
  });
  os << "b\n";
  for (Eigen::Index i = 0; i < p.b.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", p.b(i));
    os << buf;
  }
  os << "c\n";
  for (Eigen::Index i = 0; i < p.c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", p.c(i));
    os << buf;
  }
  os << "cones\n";
  for (const auto& f : p.cone.factors()) {
    switch (f.kind) {
      case ConeKind::Free: os << "free "; break;
      case ConeKind::Zero: os << "zero "; break;
      case ConeKind::Nonneg: os << "nonneg "; break;
      case ConeKind::SecondOrder: os << "soc "; break;
    }
    os << f.dim << "\n";
  }
}

}  // namespace cbf
