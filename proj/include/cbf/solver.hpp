#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <iosfwd>
#include <optional>

#include "cbf/problem.hpp"

namespace cbf {

enum class LinSolveMode { Direct, Iterative };

struct SolverSettings {
  int max_iter = 10000;
  double eps = 1e-3;        // relative tolerance on residuals and gap
  double alpha = 1.0;       // over-relaxation, [1, 2); 1.0 = plain iteration
  LinSolveMode linsolve = LinSolveMode::Direct;
  double iterative_tol = 1e-9;
  bool normalize = false;   // Ruiz data equilibration
  std::ostream* trace = nullptr;  // per-iteration "iter,pres,dres,gap,tau,kappa" lines
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterReached };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterReached;
  Eigen::VectorXd primal;      // nu (tau-normalized), when Optimal
  Eigen::VectorXd dual;        // eta, when Optimal
  Eigen::VectorXd slack;       // mu, when Optimal
  Eigen::VectorXd certificate; // infeasibility ray, scaled so b'eta = -1 / c'nu = -1
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  double objective = 0.0;      // c'nu, when Optimal
  int iterations = 0;
};

// Embedding iterates: x = (nu, eta, tau), y = (lambda, mu, kappa), both of
// length n + m + 1. After every iteration x lies in Free^n x V* x R+, y in
// {0}^n x V x R+, and x'y = 0.
struct IterateState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  int iteration = 0;
};

IterateState make_initial_state(const ConicProblem& p);

// The skew operator of the self-dual embedding applied without materializing
// the full matrix:  (A'u_eta + c u_tau, -A u_nu + b u_tau, -c'u_nu - b'u_eta).
Eigen::VectorXd embedding_apply(const ConicProblem& p, const Eigen::VectorXd& u);

// Cone of the x iterate: Free^n x V* x R+.
ConeProduct embedding_cone(const ConicProblem& p);

// Solves (I + Q) z = w for the embedding operator Q, caching one sparse
// factorization per problem-data version (direct mode) or running matrix-free
// CG on the reduced normal system (iterative mode). Residual contract:
// ||(I+Q)z - w|| <= 1e-9 (1 + ||w||), enforced by iterative refinement.
class EmbeddingLinearSolver {
 public:
  explicit EmbeddingLinearSolver(LinSolveMode mode = LinSolveMode::Direct,
                                 double tol = 1e-9)
      : mode_(mode), tol_(tol) {}

  Eigen::VectorXd solve(const ConicProblem& p, const Eigen::VectorXd& w);
  int factorization_count() const { return factorizations_; }

 private:
  void refresh(const ConicProblem& p);
  Eigen::VectorXd solve_once(const Eigen::VectorXd& w) const;
  Eigen::VectorXd m_inverse(const Eigen::VectorXd& r) const;
  Eigen::VectorXd normal_cg(const Eigen::VectorXd& rhs) const;

  LinSolveMode mode_;
  double tol_;
  const ConicProblem* cached_ = nullptr;
  std::uint64_t version_ = 0;
  int factorizations_ = 0;
  Eigen::Index n_ = 0, m_ = 0;
  const Eigen::SparseMatrix<double>* A_ = nullptr;
  Eigen::VectorXd h_;      // (c; b)
  Eigen::VectorXd g_;      // M^{-1} h
  double denom_ = 1.0;     // 1 + h'g
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kkt_;
};

// One three-step update: linear solve, cone projection, dual update.
void iterate(const ConicProblem& p, EmbeddingLinearSolver& lin, IterateState& s,
             const SolverSettings& cfg);

// Residual-based termination test on the current iterate; empty while the
// iteration should continue.
std::optional<SolveResult> check_termination(const ConicProblem& p, const IterateState& s,
                                             const SolverSettings& cfg);

SolveResult solve_conic(const ConicProblem& p, const SolverSettings& cfg = {});

}  // namespace cbf
