#pragma once

#include <Eigen/Core>
#include <vector>

namespace cbf {

enum class ConeKind { Free, Zero, Nonneg, SecondOrder };

// One factor of a Cartesian-product cone. A SecondOrder factor of dim 1
// degenerates to the nonnegative reals.
struct ConeFactor {
  ConeKind kind = ConeKind::Free;
  Eigen::Index dim = 1;
};

// Ordered Cartesian product of cone factors. Factor order is fixed at
// construction; total_dim() is the sum of factor dims.
class ConeProduct {
 public:
  ConeProduct() = default;
  explicit ConeProduct(std::vector<ConeFactor> factors);

  const std::vector<ConeFactor>& factors() const { return factors_; }
  Eigen::Index total_dim() const { return total_dim_; }
  std::size_t num_factors() const { return factors_.size(); }

 private:
  std::vector<ConeFactor> factors_;
  Eigen::Index total_dim_ = 0;
};

ConeFactor dual_factor(const ConeFactor& f);
ConeProduct dual_cone(const ConeProduct& cone);

// Euclidean projection onto a single factor. SecondOrder vectors are split
// as (head scalar, tail); the closed form has three cases.
Eigen::VectorXd project_factor(const ConeFactor& f, const Eigen::VectorXd& w);

// Factor-by-factor projection onto the product, concatenated in factor order.
Eigen::VectorXd project_product(const ConeProduct& cone, const Eigen::VectorXd& w);

// In-place variant used by solver hot loops; w must have length total_dim.
void project_product_inplace(const ConeProduct& cone, Eigen::Ref<Eigen::VectorXd> w);

// Membership test with additive tolerance (SOC: tail norm <= head + tol).
bool factor_contains(const ConeFactor& f, const Eigen::VectorXd& w, double tol);
bool cone_contains(const ConeProduct& cone, const Eigen::VectorXd& w, double tol);

}  // namespace cbf
