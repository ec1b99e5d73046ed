#include "cbf/solver.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "cbf/errors.hpp"

namespace cbf {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::MaxIterReached: return "max_iter";
  }
  return "unknown";
}

namespace {

constexpr double kLinSolveTol = 1e-9;   // residual contract of the (I+Q) solve
constexpr double kTauCollapse = 1e-6;   // tau <= kappa * kTauCollapse gates infeasibility

void validate_problem(const ConicProblem& p) {
  if (p.A.rows() != p.b.size() || p.A.cols() != p.c.size())
    throw DimensionError("problem data sizes disagree");
  if (p.cone.total_dim() != p.b.size())
    throw DimensionError("cone total dim does not match row count");
}

void validate_settings(const SolverSettings& cfg) {
  if (cfg.eps <= 0.0) throw ConfigError("eps must be positive");
  if (cfg.alpha < 1.0 || cfg.alpha >= 2.0) throw ConfigError("alpha must lie in [1, 2)");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
}

// Iterate mapped back to original problem coordinates (identity scaling when
// the problem was not equilibrated). *_raw vectors are not divided by tau.
struct Candidate {
  Eigen::VectorXd nu_raw, eta_raw, mu_raw;
  double tau = 0.0, kappa = 0.0;
};

struct CheckOutcome {
  std::optional<SolveResult> done;
  double pres = std::numeric_limits<double>::infinity();
  double dres = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
};

CheckOutcome check_impl(const ConicProblem& p, const Candidate& cand,
                        const SolverSettings& cfg) {
  CheckOutcome out;
  const auto& A = p.A.eigen();

  if (cand.tau > 0.0) {
    const Eigen::VectorXd nu = cand.nu_raw / cand.tau;
    const Eigen::VectorXd eta = cand.eta_raw / cand.tau;
    const Eigen::VectorXd mu = cand.mu_raw / cand.tau;
    out.pres = (A * nu + mu - p.b).norm() / (1.0 + p.b.norm());
    out.dres = (A.transpose() * eta + p.c).norm() / (1.0 + p.c.norm());
    const double ctnu = p.c.dot(nu);
    const double bteta = p.b.dot(eta);
    out.gap = std::abs(ctnu + bteta) / (1.0 + std::abs(ctnu) + std::abs(bteta));
    if (out.pres <= cfg.eps && out.dres <= cfg.eps && out.gap <= cfg.eps) {
      SolveResult r;
      r.status = SolveStatus::Optimal;
      r.primal = nu;
      r.dual = eta;
      r.slack = mu;
      r.primal_res = out.pres;
      r.dual_res = out.dres;
      r.gap = out.gap;
      r.objective = ctnu;
      out.done = std::move(r);
      return out;
    }
  }

  if (cand.kappa > 0.0 && cand.tau <= cand.kappa * kTauCollapse) {
    const double bteta = p.b.dot(cand.eta_raw);
    if (bteta < 0.0) {
      const double eta_norm = cand.eta_raw.norm();
      const double cert_res = (A.transpose() * cand.eta_raw).norm();
      if (cert_res <= cfg.eps * eta_norm &&
          cone_contains(dual_cone(p.cone), cand.eta_raw, 1e-9 * (1.0 + eta_norm))) {
        SolveResult r;
        r.status = SolveStatus::PrimalInfeasible;
        r.certificate = cand.eta_raw / (-bteta);
        r.primal_res = out.pres;
        r.dual_res = out.dres;
        r.gap = out.gap;
        out.done = std::move(r);
        return out;
      }
    }
    const double ctnu = p.c.dot(cand.nu_raw);
    if (ctnu < 0.0) {
      const Eigen::VectorXd slack_ray = -(A * cand.nu_raw);
      const Eigen::VectorXd proj = project_product(p.cone, slack_ray);
      if ((slack_ray - proj).norm() <= cfg.eps * cand.nu_raw.norm()) {
        SolveResult r;
        r.status = SolveStatus::DualInfeasible;
        r.certificate = cand.nu_raw / (-ctnu);
        r.primal_res = out.pres;
        r.dual_res = out.dres;
        r.gap = out.gap;
        out.done = std::move(r);
        return out;
      }
    }
  }
  return out;
}

Candidate extract_plain(const ConicProblem& p, const IterateState& s) {
  const Eigen::Index n = p.num_vars(), m = p.num_rows();
  Candidate c;
  c.nu_raw = s.x.head(n);
  c.eta_raw = s.x.segment(n, m);
  c.mu_raw = s.y.segment(n, m);
  c.tau = s.x(n + m);
  c.kappa = s.y(n + m);
  return c;
}

struct Equilibration {
  ConicProblem prob;
  Eigen::VectorXd d;  // row scales, uniform within each cone factor
  Eigen::VectorXd e;  // column scales
};

// Ruiz equilibration of A with cone-factor-uniform row scaling, so scaled
// slacks stay inside the same cones.
Equilibration ruiz_equilibrate(const ConicProblem& p) {
  const Eigen::Index m = p.num_rows(), n = p.num_vars();
  Equilibration eq;
  eq.d = Eigen::VectorXd::Ones(m);
  eq.e = Eigen::VectorXd::Ones(n);

  for (int pass = 0; pass < 10; ++pass) {
    Eigen::VectorXd rowmax = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(n);
    p.A.for_each_entry([&](Eigen::Index r, Eigen::Index c, double v) {
      const double s = std::abs(v) * eq.d(r) * eq.e(c);
      rowmax(r) = std::max(rowmax(r), s);
      colmax(c) = std::max(colmax(c), s);
    });
    Eigen::Index offset = 0;
    for (const auto& f : p.cone.factors()) {
      const double fmax = rowmax.segment(offset, f.dim).maxCoeff();
      if (fmax > 1e-12) eq.d.segment(offset, f.dim) *= 1.0 / std::sqrt(fmax);
      offset += f.dim;
    }
    for (Eigen::Index j = 0; j < n; ++j)
      if (colmax(j) > 1e-12) eq.e(j) *= 1.0 / std::sqrt(colmax(j));
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(p.A.nonzeros());
  p.A.for_each_entry([&](Eigen::Index r, Eigen::Index c, double v) {
    trip.emplace_back(r, c, v * eq.d(r) * eq.e(c));
  });
  eq.prob.A = SparseMatrix(m, n, trip);
  eq.prob.b = eq.d.cwiseProduct(p.b);
  eq.prob.c = eq.e.cwiseProduct(p.c);
  eq.prob.cone = p.cone;
  eq.prob.dims = p.dims;
  return eq;
}

}  // namespace

IterateState make_initial_state(const ConicProblem& p) {
  const Eigen::Index dim = p.num_vars() + p.num_rows() + 1;
  IterateState s;
  s.x = Eigen::VectorXd::Zero(dim);
  s.y = Eigen::VectorXd::Zero(dim);
  s.x(dim - 1) = 1.0;  // tau
  s.y(dim - 1) = 1.0;  // kappa
  return s;
}

Eigen::VectorXd embedding_apply(const ConicProblem& p, const Eigen::VectorXd& u) {
  const Eigen::Index n = p.num_vars(), m = p.num_rows();
  if (u.size() != n + m + 1)
    throw DimensionError("embedding_apply: vector length must be n + m + 1");
  const auto& A = p.A.eigen();
  Eigen::VectorXd out(n + m + 1);
  out.head(n) = A.transpose() * u.segment(n, m) + p.c * u(n + m);
  out.segment(n, m) = -(A * u.head(n)) + p.b * u(n + m);
  out(n + m) = -p.c.dot(u.head(n)) - p.b.dot(u.segment(n, m));
  return out;
}

ConeProduct embedding_cone(const ConicProblem& p) {
  std::vector<ConeFactor> f;
  f.reserve(p.cone.num_factors() + 2);
  f.push_back({ConeKind::Free, p.num_vars()});
  for (const auto& vf : p.cone.factors()) f.push_back(dual_factor(vf));
  f.push_back({ConeKind::Nonneg, 1});
  return ConeProduct(std::move(f));
}

void EmbeddingLinearSolver::refresh(const ConicProblem& p) {
  n_ = p.num_vars();
  m_ = p.num_rows();
  A_ = &p.A.eigen();
  h_.resize(n_ + m_);
  h_ << p.c, p.b;

  if (mode_ == LinSolveMode::Direct) {
    // Quasi-definite KKT form [[I, -A'], [-A, -I]]; LDL' exists for any
    // symmetric permutation, so AMD ordering is safe.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_ + m_) + 2 * A_->nonZeros());
    for (Eigen::Index i = 0; i < n_; ++i) trip.emplace_back(i, i, 1.0);
    for (Eigen::Index i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -1.0);
    for (int j = 0; j < A_->outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(*A_, j); it; ++it) {
        trip.emplace_back(n_ + it.row(), it.col(), -it.value());
        trip.emplace_back(it.col(), n_ + it.row(), -it.value());
      }
    Eigen::SparseMatrix<double> kkt(n_ + m_, n_ + m_);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt_.compute(kkt);
    if (kkt_.info() != Eigen::Success)
      throw NumericalError("factorization of the embedding system failed");
    ++factorizations_;
  } else {
    ++factorizations_;  // counts data refreshes in iterative mode as well
  }
  g_ = m_inverse(h_);
  denom_ = 1.0 + h_.dot(g_);
}

Eigen::VectorXd EmbeddingLinearSolver::normal_cg(const Eigen::VectorXd& rhs) const {
  // CG on (I + A'A) x = rhs, matrix-free.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd pdir = r;
  double rs = r.squaredNorm();
  const double tol = std::max(tol_ * rhs.norm(), 1e-300);
  const int max_it = static_cast<int>(10 * n_ + 100);
  for (int it = 0; it < max_it && std::sqrt(rs) > tol; ++it) {
    const Eigen::VectorXd op = pdir + A_->transpose() * (*A_ * pdir);
    const double alpha = rs / pdir.dot(op);
    x += alpha * pdir;
    r -= alpha * op;
    const double rs_new = r.squaredNorm();
    pdir = r + (rs_new / rs) * pdir;
    rs = rs_new;
  }
  return x;
}

Eigen::VectorXd EmbeddingLinearSolver::m_inverse(const Eigen::VectorXd& r) const {
  const Eigen::VectorXd r1 = r.head(n_);
  const Eigen::VectorXd r2 = r.tail(m_);
  Eigen::VectorXd out(n_ + m_);
  if (mode_ == LinSolveMode::Direct) {
    Eigen::VectorXd stacked(n_ + m_);
    stacked << r1, r2;
    const Eigen::VectorXd sol = kkt_.solve(stacked);
    out.head(n_) = sol.head(n_);
    out.tail(m_) = -sol.tail(m_);
  } else {
    const Eigen::VectorXd p = normal_cg(r1 - A_->transpose() * r2);
    out.head(n_) = p;
    out.tail(m_) = r2 + *A_ * p;
  }
  return out;
}

Eigen::VectorXd EmbeddingLinearSolver::solve_once(const Eigen::VectorXd& w) const {
  const double w2 = w(n_ + m_);
  const Eigen::VectorXd p = m_inverse(w.head(n_ + m_) - h_ * w2);
  Eigen::VectorXd z(n_ + m_ + 1);
  z.head(n_ + m_) = p - g_ * (h_.dot(p) / denom_);
  z(n_ + m_) = w2 + h_.dot(z.head(n_ + m_));
  return z;
}

Eigen::VectorXd EmbeddingLinearSolver::solve(const ConicProblem& p, const Eigen::VectorXd& w) {
  validate_problem(p);
  if (w.size() != p.num_vars() + p.num_rows() + 1)
    throw DimensionError("linear solve rhs must have length n + m + 1");
  if (cached_ != &p || version_ != p.version) {
    refresh(p);
    cached_ = &p;
    version_ = p.version;
  }

  Eigen::VectorXd z = solve_once(w);
  const double target = kLinSolveTol * (1.0 + w.norm());
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd resid = w - z - embedding_apply(p, z);
    if (resid.norm() <= target) break;
    z += solve_once(resid);
  }
  return z;
}

void iterate(const ConicProblem& p, EmbeddingLinearSolver& lin, IterateState& s,
             const SolverSettings& cfg) {
  validate_settings(cfg);
  const Eigen::Index dim = p.num_vars() + p.num_rows() + 1;
  if (s.x.size() != dim || s.y.size() != dim)
    throw DimensionError("iterate state does not match problem size");

  Eigen::VectorXd utilde = lin.solve(p, s.x + s.y);
  if (cfg.alpha != 1.0) utilde = cfg.alpha * utilde + (1.0 - cfg.alpha) * s.x;

  const ConeProduct cone_x = embedding_cone(p);
  Eigen::VectorXd xnew = utilde - s.y;
  project_product_inplace(cone_x, xnew);
  s.y += xnew - utilde;
  s.x = std::move(xnew);
  ++s.iteration;

#ifndef NDEBUG
  assert(cone_contains(cone_x, s.x, 1e-9 * (1.0 + s.x.norm())));
  assert(cone_contains(dual_cone(cone_x), s.y, 1e-9 * (1.0 + s.y.norm())));
  assert(std::abs(s.x.dot(s.y)) <= 1e-8 * (1.0 + s.x.norm() * s.y.norm()));
#endif
}

std::optional<SolveResult> check_termination(const ConicProblem& p, const IterateState& s,
                                             const SolverSettings& cfg) {
  validate_problem(p);
  auto out = check_impl(p, extract_plain(p, s), cfg);
  if (out.done) out.done->iterations = s.iteration;
  return out.done;
}

SolveResult solve_conic(const ConicProblem& p, const SolverSettings& cfg) {
  validate_problem(p);
  validate_settings(cfg);

  std::optional<Equilibration> eq;
  if (cfg.normalize) eq = ruiz_equilibrate(p);
  const ConicProblem& work = eq ? eq->prob : p;

  EmbeddingLinearSolver lin(cfg.linsolve, cfg.iterative_tol);
  IterateState state = make_initial_state(work);
  const Eigen::Index n = p.num_vars(), m = p.num_rows();

  CheckOutcome last;
  for (int it = 0; it < cfg.max_iter; ++it) {
    iterate(work, lin, state, cfg);

    Candidate cand = extract_plain(work, state);
    if (eq) {
      cand.nu_raw.array() *= eq->e.array();
      cand.eta_raw.array() *= eq->d.array();
      cand.mu_raw.array() /= eq->d.array();
    }
    last = check_impl(p, cand, cfg);

    if (cfg.trace) {
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", state.iteration,
                    last.pres, last.dres, last.gap, state.x(n + m), state.y(n + m));
      *cfg.trace << line;
    }
    if (last.done) {
      last.done->iterations = state.iteration;
      return *std::move(last.done);
    }
  }

  SolveResult r;
  r.status = SolveStatus::MaxIterReached;
  r.primal_res = last.pres;
  r.dual_res = last.dres;
  r.gap = last.gap;
  r.iterations = cfg.max_iter;
  return r;
}

}  // namespace cbf
