#include "rta/platoon.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "rta/signal.hpp"

namespace rta {

PlatoonConfig PlatoonConfig::defaults() {
  PlatoonConfig cfg;
  cfg.N = 3;
  cfg.A.resize(3, 2);
  cfg.A << -1, 0,
            1, -1,
            0, 1;
  cfg.W = IntervalVector::centered(Eigen::VectorXd::Constant(3, 0.1));
  return cfg;
}

void PlatoonConfig::validate() const {
  if (N < 2) throw std::invalid_argument("PlatoonConfig: need at least two vehicles");
  if (A.rows() != N || A.cols() < 1) {
    throw std::invalid_argument("PlatoonConfig: incidence matrix must be N x K, K >= 1");
  }
  for (int j = 0; j < A.cols(); ++j) {
    int heads = 0, tails = 0;
    for (int i = 0; i < A.rows(); ++i) {
      const double v = A(i, j);
      if (v == 1.0) ++heads;
      else if (v == -1.0) ++tails;
      else if (v != 0.0) throw std::invalid_argument("PlatoonConfig: incidence entries must be 0/±1");
    }
    if (heads != 1 || tails != 1) {
      std::ostringstream msg;
      msg << "PlatoonConfig: column " << j << " must have exactly one +1 and one -1";
      throw std::invalid_argument(msg.str());
    }
  }
  if (beta > 0.0) throw std::invalid_argument("PlatoonConfig: beta must be <= 0");
  if (!(kappa > 0.0) || !(sigma > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("PlatoonConfig: kappa, sigma, delta must be positive");
  }
  if (W.dim() != N || !W.finite()) {
    throw std::invalid_argument("PlatoonConfig: W must be a finite N-dimensional box");
  }
  if (!(p > 0.0) || !(T_b > 0.0) || !(z_limit > 0.0)) {
    throw std::invalid_argument("PlatoonConfig: p, T_b, z_limit must be positive");
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> incidence_parts(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd plus = A.cwiseMax(0.0);
  Eigen::MatrixXd minus = A.cwiseMin(0.0);
  return {std::move(plus), std::move(minus)};
}

Eigen::MatrixXd lyapunov_matrix(const PlatoonConfig& cfg) {
  const int N = cfg.N;
  const int K = cfg.edges();
  const Eigen::MatrixXd& A = cfg.A;
  Eigen::MatrixXd P(N + K, N + K);
  P.topLeftCorner(N, N) = cfg.kappa * cfg.sigma * Eigen::MatrixXd::Identity(N, N) + A * A.transpose();
  P.topRightCorner(N, K) = -cfg.beta * A;
  P.bottomLeftCorner(K, N) = -cfg.beta * A.transpose();
  P.bottomRightCorner(K, K) =
      (cfg.kappa * cfg.kappa * cfg.sigma * cfg.sigma + cfg.beta * cfg.beta) *
          Eigen::MatrixXd::Identity(K, K) +
      cfg.kappa * cfg.sigma * A.transpose() * A;
  return P;
}

PlatoonModel build_platoon(const PlatoonConfig& cfg) {
  cfg.validate();
  PlatoonModel model;
  model.config = cfg;

  const int N = cfg.N;
  const int K = cfg.edges();
  const int n = N + K;
  const auto [A_plus, A_minus] = incidence_parts(cfg.A);
  const Eigen::MatrixXd A = cfg.A;
  const double beta = cfg.beta, kappa = cfg.kappa, sigma = cfg.sigma;

  auto spring = [kappa, sigma](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return kappa * (sigma * z.array()).tanh().matrix();
  };

  // open-loop drift and the constant input/disturbance matrices
  model.system.n = n;
  model.system.m = K;
  model.system.n_w = N;
  model.system.f = [N, K, beta, A](const Eigen::VectorXd& s) {
    Eigen::VectorXd out(N + K);
    out.head(N) = beta * s.head(N);
    out.tail(K) = A.transpose() * s.head(N);
    return out;
  };
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(n, K);
  g1.topRows(N) = -A;
  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(n, N);
  g2.topRows(N) = Eigen::MatrixXd::Identity(N, N);
  model.system.g1 = [g1](const Eigen::VectorXd&) { return g1; };
  model.system.g2 = [g2](const Eigen::VectorXd&) { return g2; };
  model.system.statespace = IntervalVector::unbounded(n);
  model.system.W = cfg.W;

  // Lyapunov level set and barrier h = delta - V
  model.P = lyapunov_matrix(cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(model.P);
  model.lambda_min = eigs.eigenvalues().minCoeff();
  if (model.lambda_min <= 0.0) {
    throw std::runtime_error("build_platoon: Lyapunov matrix is not positive definite");
  }
  const Eigen::MatrixXd P = model.P;
  const double delta = cfg.delta;

  BarrierFunction barrier;
  barrier.h = [P, delta](const Eigen::VectorXd& s) { return delta - s.dot(P * s); };
  barrier.grad_h = [P](const Eigen::VectorXd& s) -> Eigen::VectorXd { return -2.0 * (P * s); };
  barrier.concavity_domain = IntervalVector::centered(Eigen::VectorXd::Constant(n, 10.0));

  model.policy.u_b = [N, spring](const Eigen::VectorXd& s) { return spring(s.tail(s.size() - N)); };
  model.policy.h = barrier;
  model.policy.alpha = [](double v) { return 1000.0 * v * v * v; };
  model.policy.T_b = cfg.T_b;

  model.backup_loop = close_loop(model.system, model.policy.u_b);

  // decomposition of the backup closed loop: the spring force enters the
  // velocity rows through the sign-split incidence parts, and the
  // displacement rows split A^T x into increasing/decreasing contributions
  model.decomposition.n = n;
  model.decomposition.n_w = N;
  model.decomposition.d = [N, K, beta, A_plus, A_minus, spring](
                              const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& sh, const Eigen::VectorXd& wh) {
    (void)wh;
    Eigen::VectorXd out(N + K);
    out.head(N) = beta * s.head(N) + w - A_minus * spring(s.tail(K)) - A_plus * spring(sh.tail(K));
    out.tail(K) = A_plus.transpose() * s.head(N) + A_minus.transpose() * sh.head(N);
    return out;
  };

  // time-reversed backup field -F_b: the sign flip exchanges the monotone
  // roles, so the incidence splits and the disturbance argument swap sides
  model.reverse_decomposition.n = n;
  model.reverse_decomposition.n_w = N;
  model.reverse_decomposition.d = [N, K, beta, A_plus, A_minus, spring](
                                      const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                                      const Eigen::VectorXd& sh, const Eigen::VectorXd& wh) {
    (void)w;
    Eigen::VectorXd out(N + K);
    out.head(N) =
        -beta * s.head(N) - wh + A_plus * spring(s.tail(K)) + A_minus * spring(sh.tail(K));
    out.tail(K) = -A_minus.transpose() * s.head(N) - A_plus.transpose() * sh.head(N);
    return out;
  };

  const double half_width = std::sqrt(delta / model.lambda_min);
  model.sb_bounding_box = IntervalVector::centered(Eigen::VectorXd::Constant(n, half_width));

  for (int j = 0; j < K; ++j) {
    model.unsafe.abs_thresholds.emplace_back(N + j, cfg.z_limit);
  }

  Eigen::VectorXd fals(n);
  fals.head(N).setConstant(cfg.z_limit);
  fals.tail(K).setConstant(cfg.z_limit + 2.0);
  model.falsification_box = IntervalVector::centered(fals);

  // registration sanity: the maps must evaluate anywhere in the statespace
  auto rng = seeded_rng(7);
  const IntervalVector probe = IntervalVector::centered(Eigen::VectorXd::Constant(n, 10.0));
  for (int s = 0; s < 10; ++s) {
    const Eigen::VectorXd x = uniform_in_box(rng, probe);
    const Eigen::VectorXd u = model.policy.u_b(x);
    if (!eval_system(model.system, x, u, cfg.W.center()).allFinite()) {
      throw std::runtime_error("build_platoon: dynamics evaluate non-finite");
    }
  }
  return model;
}

std::string InvarianceReport::describe() const {
  std::ostringstream out;
  out << "backup invariance: " << samples << " shell samples, worst margin " << worst_margin
      << ", " << violations.size() << " violation(s)";
  return out.str();
}

InvarianceReport verify_backup_invariance(const PlatoonModel& model, long n_samples,
                                          std::uint64_t seed) {
  InvarianceReport report;
  const auto& barrier = model.policy.h;
  const auto& alpha = model.policy.alpha;
  const double delta = model.config.delta;
  const auto vertices = corners(model.config.W);
  auto rng = seeded_rng(seed);

  auto check_state = [&](const Eigen::VectorXd& x) {
    const double hx = barrier.h(x);
    const Eigen::VectorXd g = barrier.grad_h(x);
    for (const auto& w : vertices) {
      const double margin = g.dot(model.backup_loop.F(x, w)) + alpha(hx);
      if (margin < report.worst_margin) {
        report.worst_margin = margin;
        report.worst_state = x;
        report.worst_vertex = w;
      }
      if (margin < 0.0) {
        report.violations.push_back({x, w, margin});
      }
    }
    ++report.samples;
  };

  // uniform over the shell h in [0, delta]
  long drawn = 0;
  const long uniform_budget = n_samples / 2;
  while (drawn < uniform_budget) {
    const Eigen::VectorXd x = uniform_in_box(rng, model.sb_bounding_box);
    const double hx = barrier.h(x);
    if (hx < 0.0 || hx > delta) continue;
    check_state(x);
    ++drawn;
  }

  // radially rescaled draws concentrated near the h = 0 boundary, where
  // alpha(h) vanishes and the rate condition is tight
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (drawn < n_samples) {
    Eigen::VectorXd x = uniform_in_box(rng, model.sb_bounding_box);
    const double V = delta - barrier.h(x);
    if (V <= 0.0) continue;
    const double u = unit(rng);
    const double target = delta * (1.0 - 0.01 * u * u);  // h in [0, 0.01 delta], biased to 0
    x *= std::sqrt(target / V);
    check_state(x);
    ++drawn;
  }
  return report;
}

}  // namespace rta
