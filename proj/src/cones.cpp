#include "cbf/cones.hpp"

#include <cmath>

#include "cbf/errors.hpp"

namespace cbf {

ConeProduct::ConeProduct(std::vector<ConeFactor> factors)
    : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.dim < 1) throw ConfigError("cone factor dim must be >= 1");
    total_dim_ += f.dim;
  }
}

ConeFactor dual_factor(const ConeFactor& f) {
  switch (f.kind) {
    case ConeKind::Free:
      return {ConeKind::Zero, f.dim};
    case ConeKind::Zero:
      return {ConeKind::Free, f.dim};
    case ConeKind::Nonneg:
    case ConeKind::SecondOrder:
      return f;  // self-dual
  }
  return f;
}

ConeProduct dual_cone(const ConeProduct& cone) {
  std::vector<ConeFactor> duals;
  duals.reserve(cone.num_factors());
  for (const auto& f : cone.factors()) duals.push_back(dual_factor(f));
  return ConeProduct(std::move(duals));
}

namespace {

void project_factor_segment(const ConeFactor& f, Eigen::Ref<Eigen::VectorXd> w) {
  switch (f.kind) {
    case ConeKind::Free:
      return;
    case ConeKind::Zero:
      w.setZero();
      return;
    case ConeKind::Nonneg:
      w = w.cwiseMax(0.0);
      return;
    case ConeKind::SecondOrder: {
      if (f.dim == 1) {  // Q^1 is the nonnegative reals
        w(0) = std::max(w(0), 0.0);
        return;
      }
      const double head = w(0);
      auto tail = w.tail(f.dim - 1);
      const double tail_norm = tail.norm();
      if (tail_norm <= head) return;  // already in the cone
      if (tail_norm <= -head) {       // in the polar cone
        w.setZero();
        return;
      }
      const double scale = 0.5 * (1.0 + head / tail_norm);
      w(0) = scale * tail_norm;
      tail *= scale;
      return;
    }
  }
}

}  // namespace

Eigen::VectorXd project_factor(const ConeFactor& f, const Eigen::VectorXd& w) {
  if (w.size() != f.dim)
    throw DimensionError("project_factor: vector length " + std::to_string(w.size()) +
                         " does not match factor dim " + std::to_string(f.dim));
  Eigen::VectorXd out = w;
  project_factor_segment(f, out);
  return out;
}

void project_product_inplace(const ConeProduct& cone, Eigen::Ref<Eigen::VectorXd> w) {
  Eigen::Index offset = 0;
  for (const auto& f : cone.factors()) {
    project_factor_segment(f, w.segment(offset, f.dim));
    offset += f.dim;
  }
}

Eigen::VectorXd project_product(const ConeProduct& cone, const Eigen::VectorXd& w) {
  if (w.size() != cone.total_dim())
    throw DimensionError("project_product: vector length " + std::to_string(w.size()) +
                         " does not match cone total dim " +
                         std::to_string(cone.total_dim()));
  Eigen::VectorXd out = w;
  project_product_inplace(cone, out);
  return out;
}

bool factor_contains(const ConeFactor& f, const Eigen::VectorXd& w, double tol) {
  if (w.size() != f.dim) return false;
  switch (f.kind) {
    case ConeKind::Free:
      return true;
    case ConeKind::Zero:
      return w.lpNorm<Eigen::Infinity>() <= tol;
    case ConeKind::Nonneg:
      return (w.array() >= -tol).all();
    case ConeKind::SecondOrder:
      if (f.dim == 1) return w(0) >= -tol;
      return w.tail(f.dim - 1).norm() <= w(0) + tol;
  }
  return false;
}

bool cone_contains(const ConeProduct& cone, const Eigen::VectorXd& w, double tol) {
  if (w.size() != cone.total_dim()) return false;
  Eigen::Index offset = 0;
  for (const auto& f : cone.factors()) {
    if (!factor_contains(f, w.segment(offset, f.dim), tol)) return false;
    offset += f.dim;
  }
  return true;
}

}  // namespace cbf
