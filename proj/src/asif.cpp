#include "rta/asif.hpp"

#include <cmath>
#include <stdexcept>

namespace rta {

const char* to_string(FilterStatus status) {
  switch (status) {
    case FilterStatus::passed_desired: return "passed-desired";
    case FilterStatus::projected: return "projected";
    case FilterStatus::backup_fallback: return "backup-fallback";
    case FilterStatus::raw: return "raw";
  }
  return "?";
}

ReducedConstraint assemble_constraint(const Eigen::VectorXd& x, double value,
                                      const Eigen::VectorXd& a, const ControlAffineSystem& sys,
                                      const std::function<double(double)>& alpha) {
  if (!a.allFinite()) {
    throw std::invalid_argument("assemble_constraint: non-finite barrier gradient");
  }
  ReducedConstraint rc;
  rc.c = (a.transpose() * sys.g1(x)).transpose();

  const double base = -alpha(value) - a.dot(sys.f(x));
  const Eigen::RowVectorXd ag2 = a.transpose() * sys.g2(x);

  // b(w) = base - ag2 . w is affine in w; its max over the box is attained
  // coordinate-wise at whichever endpoint minimizes ag2_k * w_k.
  double worst = base;
  for (int k = 0; k < sys.n_w; ++k) {
    worst -= std::min(ag2[k] * sys.W.lower()[k], ag2[k] * sys.W.upper()[k]);
  }
  rc.b_star = worst;

  rc.b_vertices.reserve(std::size_t{1} << sys.n_w);
  for (const auto& w : corners(sys.W)) {
    rc.b_vertices.push_back(base - ag2.dot(w));
  }
  return rc;
}

std::optional<Eigen::VectorXd> solve_projection(const Eigen::VectorXd& u_d,
                                                const Eigen::VectorXd& c, double b_star,
                                                double tol_c) {
  const double attained = c.dot(u_d);
  if (attained >= b_star) return u_d;
  const double c_norm2 = c.squaredNorm();
  if (std::sqrt(c_norm2) <= tol_c) return std::nullopt;
  return u_d + c * ((b_star - attained) / c_norm2);
}

FilterDecision asif_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u_desired,
                         const BackupPolicy& policy, const ControlAffineSystem& sys,
                         const DecompositionFunction& d, const AsifParams& params) {
  FilterDecision decision;

  PsiEvaluation eval = eval_psi(x, policy, d, sys.W, sys.statespace, params.psi);
  decision.psi = eval.psi;
  decision.tau_tie = eval.tau_tie;

  if (eval.psi == kNegInf) {
    decision.u = policy.u_b(x);
    decision.status = FilterStatus::backup_fallback;
    decision.no_certificate = true;
    return decision;
  }
  if (eval.psi < 0.0) {
    // No look-ahead certificate from this state; Proposition-2 reasoning
    // still covers the backup policy, so switch to it immediately.
    decision.u = policy.u_b(x);
    decision.status = FilterStatus::backup_fallback;
    return decision;
  }

  const Eigen::VectorXd a =
      grad_psi(x, eval, policy, d, sys.W, sys.statespace, params.psi, params.grad_path);
  const ReducedConstraint rc = assemble_constraint(x, eval.psi, a, sys, policy.alpha);
  decision.constraint = rc;
  decision.slack = rc.c.dot(u_desired) - rc.b_star;

  const auto u_opt = solve_projection(u_desired, rc.c, rc.b_star);
  if (!u_opt) {
    decision.u = policy.u_b(x);
    decision.status = FilterStatus::backup_fallback;
    return decision;
  }
  decision.u = *u_opt;
  decision.status =
      decision.slack >= 0.0 ? FilterStatus::passed_desired : FilterStatus::projected;
  return decision;
}

FilterDecision vanilla_cbf_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u_desired,
                                const BarrierFunction& h,
                                const std::function<double(double)>& alpha,
                                const ControlAffineSystem& sys, const Feedback& fallback) {
  FilterDecision decision;
  const double value = h.h(x);
  decision.psi = value;

  const ReducedConstraint rc = assemble_constraint(x, value, h.grad_h(x), sys, alpha);
  decision.constraint = rc;
  decision.slack = rc.c.dot(u_desired) - rc.b_star;

  const auto u_opt = solve_projection(u_desired, rc.c, rc.b_star);
  if (!u_opt) {
    decision.u = fallback ? fallback(x) : Eigen::VectorXd::Zero(sys.m).eval();
    decision.status = FilterStatus::backup_fallback;
    return decision;
  }
  decision.u = *u_opt;
  decision.status =
      decision.slack >= 0.0 ? FilterStatus::passed_desired : FilterStatus::projected;
  return decision;
}

}  // namespace rta
