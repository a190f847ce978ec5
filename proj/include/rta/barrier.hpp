#pragma once

#include <Eigen/Core>

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "rta/dynamics.hpp"
#include "rta/intervals.hpp"
#include "rta/policy.hpp"
#include "rta/reachability.hpp"

namespace rta {

// Log-Sum-Exponential soft minimum of a finite list with sharpness p > 0,
// computed in shifted form for overflow safety. Satisfies
//   min - (1/p) log(count) <= lse < min   (equality, = min, when count == 1).
double lse(std::span<const double> values, double p);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exact min of h over the corner multiset of tube step k; -inf sentinel on an
// invalid step ("no certificate at this time").
double gamma_ideal(const ReachTube& tube, const BarrierFunction& h, std::size_t k);

// LSE soft-min of h over the full 2^n corner multiset of tube step k; lies in
// [gamma_ideal - (n/p) log 2, gamma_ideal). -inf sentinel on an invalid step.
double gamma_soft(const ReachTube& tube, const BarrierFunction& h, double p, std::size_t k);

// Embedding tube from the degenerate box [x, x], the common substrate of the
// gamma traces below.
ReachTube embedding_tube(const Eigen::VectorXd& x, const DecompositionFunction& d,
                         const IntervalVector& W, const IntervalVector& statespace, double horizon,
                         double dt);

std::vector<std::pair<double, double>> gamma_ideal_trace(const ReachTube& tube,
                                                         const BarrierFunction& h);
std::vector<std::pair<double, double>> gamma_soft_trace(const ReachTube& tube,
                                                        const BarrierFunction& h, double p);

struct PsiParams {
  double p{1000.0};
  double dt_embed{0.01};
};

struct PsiEvaluation {
  double psi{kNegInf};
  double tau_star{std::numeric_limits<double>::quiet_NaN()};
  Eigen::VectorXd grad;  // empty until grad_psi fills it
  std::vector<std::pair<double, double>> gamma_trace;  // (tau, gamma), -inf on invalid steps
  double valid_horizon{-1.0};
  // More than one grid time attains the max; the smallest is used.
  bool tau_tie{false};
  // Terminal embedding state at tau_star (kept for the chain-rule gradient).
  EmbeddingState a_star;
};

// Grid supremum of gamma over [0, T_b] from the degenerate initial box [x, x].
// psi = max over valid steps, tau_star = smallest maximizer; psi = -inf when
// no step is valid. Throws if x lies outside the statespace.
PsiEvaluation eval_psi(const Eigen::VectorXd& x, const BackupPolicy& policy,
                       const DecompositionFunction& d, const IntervalVector& W,
                       const IntervalVector& statespace, const PsiParams& params = {});

// Same grid supremum over gamma_ideal (used for Lemma-2 style comparisons).
double eval_psi_ideal(const Eigen::VectorXd& x, const BackupPolicy& policy,
                      const DecompositionFunction& d, const IntervalVector& W,
                      const IntervalVector& statespace, const PsiParams& params = {});

enum class GradPath {
  // Central differences of gamma(tau*; .) — the default route.
  direct,
  // FD Jacobian of the embedding flow chained through the LSE softmin
  // weights; retained for cross-validation.
  chain_rule,
};

// Gradient of Psi at x: d gamma / d x at the maximizing time, obtained from
// 2n extra embedding simulations of horizon tau_star with central step
// 1e-5 * (1 + |x_i|). `eval` must have been produced at x with finite psi.
Eigen::VectorXd grad_psi(const Eigen::VectorXd& x, const PsiEvaluation& eval,
                         const BackupPolicy& policy, const DecompositionFunction& d,
                         const IntervalVector& W, const IntervalVector& statespace,
                         const PsiParams& params = {}, GradPath path = GradPath::direct);

}  // namespace rta
