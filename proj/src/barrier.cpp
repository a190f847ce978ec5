#include "rta/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rta {

double lse(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("lse: empty value list");
  if (!(p > 0.0)) throw std::invalid_argument("lse: p must be positive");
  const double m = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-p * (v - m));
  return m - std::log(sum) / p;
}

namespace {

std::vector<double> corner_values(const IntervalVector& box, const BarrierFunction& h) {
  std::vector<double> values;
  const auto verts = corners(box);
  values.reserve(verts.size());
  for (const auto& z : verts) values.push_back(h.h(z));
  return values;
}

}  // namespace

double gamma_ideal(const ReachTube& tube, const BarrierFunction& h, std::size_t k) {
  if (k >= tube.size()) throw std::out_of_range("gamma_ideal: step out of range");
  if (!tube.valid[k]) return kNegInf;
  const auto values = corner_values(tube.box(k), h);
  return *std::min_element(values.begin(), values.end());
}

double gamma_soft(const ReachTube& tube, const BarrierFunction& h, double p, std::size_t k) {
  if (k >= tube.size()) throw std::out_of_range("gamma_soft: step out of range");
  if (!tube.valid[k]) return kNegInf;
  return lse(corner_values(tube.box(k), h), p);
}

ReachTube embedding_tube(const Eigen::VectorXd& x, const DecompositionFunction& d,
                         const IntervalVector& W, const IntervalVector& statespace, double horizon,
                         double dt) {
  return forward_overapprox(d, W, IntervalVector::point(x), statespace, horizon, dt);
}

std::vector<std::pair<double, double>> gamma_ideal_trace(const ReachTube& tube,
                                                         const BarrierFunction& h) {
  std::vector<std::pair<double, double>> trace;
  trace.reserve(tube.size());
  for (std::size_t k = 0; k < tube.size(); ++k) {
    trace.emplace_back(tube.times[k], gamma_ideal(tube, h, k));
  }
  return trace;
}

std::vector<std::pair<double, double>> gamma_soft_trace(const ReachTube& tube,
                                                        const BarrierFunction& h, double p) {
  std::vector<std::pair<double, double>> trace;
  trace.reserve(tube.size());
  for (std::size_t k = 0; k < tube.size(); ++k) {
    trace.emplace_back(tube.times[k], gamma_soft(tube, h, p, k));
  }
  return trace;
}

PsiEvaluation eval_psi(const Eigen::VectorXd& x, const BackupPolicy& policy,
                       const DecompositionFunction& d, const IntervalVector& W,
                       const IntervalVector& statespace, const PsiParams& params) {
  if (!statespace.contains(x)) {
    throw std::invalid_argument("eval_psi: state outside the statespace");
  }
  const ReachTube tube = embedding_tube(x, d, W, statespace, policy.T_b, params.dt_embed);

  PsiEvaluation eval;
  eval.gamma_trace = gamma_soft_trace(tube, policy.h, params.p);
  eval.valid_horizon = tube.valid_horizon();

  std::size_t best = tube.size();
  for (std::size_t k = 0; k < eval.gamma_trace.size(); ++k) {
    const double g = eval.gamma_trace[k].second;
    if (g == kNegInf) continue;
    if (best == tube.size() || g > eval.psi) {
      eval.psi = g;
      best = k;
    }
  }
  if (best < tube.size()) {
    eval.tau_star = eval.gamma_trace[best].first;
    eval.a_star = tube.states[best];
    // exact-equality tie over the grid; the smallest tau is kept
    eval.tau_tie = std::count_if(eval.gamma_trace.begin(), eval.gamma_trace.end(),
                                 [&](const auto& tg) { return tg.second == eval.psi; }) > 1;
  }
  return eval;
}

double eval_psi_ideal(const Eigen::VectorXd& x, const BackupPolicy& policy,
                      const DecompositionFunction& d, const IntervalVector& W,
                      const IntervalVector& statespace, const PsiParams& params) {
  if (!statespace.contains(x)) {
    throw std::invalid_argument("eval_psi_ideal: state outside the statespace");
  }
  const ReachTube tube = embedding_tube(x, d, W, statespace, policy.T_b, params.dt_embed);
  double best = kNegInf;
  for (std::size_t k = 0; k < tube.size(); ++k) {
    best = std::max(best, gamma_ideal(tube, policy.h, k));
  }
  return best;
}

namespace {

// Terminal embedding state of the flow from [x, x] over [0, tau].
EmbeddingState terminal_embedding(const Eigen::VectorXd& x, const DecompositionFunction& d,
                                  const IntervalVector& W, const IntervalVector& statespace,
                                  double tau, double dt) {
  const ReachTube tube = forward_overapprox(d, W, IntervalVector::point(x), statespace, tau, dt);
  if (!tube.valid.back()) {
    throw std::runtime_error("grad_psi: perturbed embedding trajectory became invalid");
  }
  return tube.states.back();
}

}  // namespace

Eigen::VectorXd grad_psi(const Eigen::VectorXd& x, const PsiEvaluation& eval,
                         const BackupPolicy& policy, const DecompositionFunction& d,
                         const IntervalVector& W, const IntervalVector& statespace,
                         const PsiParams& params, GradPath path) {
  if (!std::isfinite(eval.tau_star)) {
    throw std::invalid_argument("grad_psi: evaluation has no finite maximizer");
  }
  const int n = static_cast<int>(x.size());
  const double tau = eval.tau_star;

  // 2n perturbed embedding simulations of horizon tau*
  std::vector<EmbeddingState> plus(n), minus(n);
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) {
    eps[i] = 1e-5 * (1.0 + std::abs(x[i]));
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += eps[i];
    xm[i] -= eps[i];
    plus[i] = terminal_embedding(xp, d, W, statespace, tau, params.dt_embed);
    minus[i] = terminal_embedding(xm, d, W, statespace, tau, params.dt_embed);
  }

  Eigen::VectorXd grad(n);
  if (path == GradPath::direct) {
    for (int i = 0; i < n; ++i) {
      const double gp = lse(corner_values(rect_of(plus[i]), policy.h), params.p);
      const double gm = lse(corner_values(rect_of(minus[i]), policy.h), params.p);
      grad[i] = (gp - gm) / (2.0 * eps[i]);
    }
    return grad;
  }

  // Chain rule: softmin weights over the unperturbed corners, times grad_h,
  // times the FD Jacobian of the embedding flow.
  Eigen::MatrixXd flow_jac(2 * n, n);
  for (int j = 0; j < n; ++j) {
    flow_jac.col(j) = (plus[j].stacked() - minus[j].stacked()) / (2.0 * eps[j]);
  }
  const IntervalVector box = rect_of(eval.a_star);
  const auto verts = corners(box);
  std::vector<double> values;
  values.reserve(verts.size());
  for (const auto& z : verts) values.push_back(policy.h.h(z));
  const double vmin = *std::min_element(values.begin(), values.end());
  double weight_sum = 0.0;
  std::vector<double> weights(values.size());
  for (std::size_t c = 0; c < values.size(); ++c) {
    weights[c] = std::exp(-params.p * (values[c] - vmin));
    weight_sum += weights[c];
  }
  grad.setZero();
  for (std::size_t c = 0; c < verts.size(); ++c) {
    const Eigen::VectorXd gh = policy.h.grad_h(verts[c]);
    // corner bit i selects the over (upper) half row of the flow Jacobian
    Eigen::RowVectorXd contribution = Eigen::RowVectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int row = ((c >> i) & 1) ? n + i : i;
      contribution += gh[i] * flow_jac.row(row);
    }
    grad += (weights[c] / weight_sum) * contribution.transpose();
  }
  return grad;
}

}  // namespace rta
