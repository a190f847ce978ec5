#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

#include "rta/barrier.hpp"
#include "rta/dynamics.hpp"
#include "rta/policy.hpp"

namespace rta {

enum class FilterStatus { passed_desired, projected, backup_fallback, raw };

const char* to_string(FilterStatus status);

// One effective affine constraint c . u >= b_star, reduced from the family
// a . (f + g1 u + g2 w) >= -alpha(value) over all disturbance vertices w.
// The explicit per-vertex right-hand sides are kept as a cross-check oracle.
struct ReducedConstraint {
  Eigen::VectorXd c;
  double b_star{0.0};
  std::vector<double> b_vertices;  // aligned with corners(W) enumeration
};

// Builds the reduced constraint from the barrier row a (grad Psi or grad h).
// b_star equals the max of the affine-in-w right-hand side over the 2^{n_w}
// vertices, computed coordinate-wise.
ReducedConstraint assemble_constraint(const Eigen::VectorXd& x, double value,
                                      const Eigen::VectorXd& a, const ControlAffineSystem& sys,
                                      const std::function<double(double)>& alpha);

// Below this, the constraint row is treated as degenerate (c = 0).
inline constexpr double kGradientDegeneracyTol = 1e-10;

// Exact minimizer of ||u - u_d||^2 subject to c . u >= b_star: u_d when
// feasible at u_d, otherwise the halfspace projection; nullopt when the
// constraint is degenerate and violated.
std::optional<Eigen::VectorXd> solve_projection(const Eigen::VectorXd& u_d,
                                                const Eigen::VectorXd& c, double b_star,
                                                double tol_c = kGradientDegeneracyTol);

struct FilterDecision {
  Eigen::VectorXd u;
  FilterStatus status{FilterStatus::raw};
  double psi{std::numeric_limits<double>::quiet_NaN()};
  std::optional<ReducedConstraint> constraint;
  double slack{std::numeric_limits<double>::quiet_NaN()};  // c . u_d - b_star
  // Psi had no valid certificate (embedding invalid everywhere).
  bool no_certificate{false};
  bool tau_tie{false};
};

struct AsifParams {
  PsiParams psi;
  GradPath grad_path{GradPath::direct};
};

// One step of the assured controller: evaluates Psi and its gradient,
// projects the desired input onto the reduced constraint, and falls back to
// the backup controller when the program is infeasible or Psi < 0 (the
// look-ahead certificate is not established, so the filter defers to the
// policy whose safety Psi >= 0 would have certified).
FilterDecision asif_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u_desired,
                         const BackupPolicy& policy, const ControlAffineSystem& sys,
                         const DecompositionFunction& d, const AsifParams& params = {});

// Baseline CBF-QP on h directly (no look-ahead): renders S_b itself
// invariant. On infeasibility applies `fallback` (zero input when unset).
FilterDecision vanilla_cbf_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u_desired,
                                const BarrierFunction& h,
                                const std::function<double(double)>& alpha,
                                const ControlAffineSystem& sys, const Feedback& fallback = {});

}  // namespace rta
