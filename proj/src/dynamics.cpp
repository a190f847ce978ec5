#include "rta/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rta/signal.hpp"

namespace rta {

Eigen::VectorXd eval_system(const ControlAffineSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  if (x.size() != sys.n || u.size() != sys.m || w.size() != sys.n_w) {
    throw std::invalid_argument("eval_system: dimension mismatch");
  }
  return sys.f(x) + sys.g1(x) * u + sys.g2(x) * w;
}

ClosedLoopField close_loop(const ControlAffineSystem& sys, Feedback u_b) {
  ClosedLoopField field;
  field.n = sys.n;
  field.n_w = sys.n_w;
  field.F = [sys, u_b = std::move(u_b)](const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return eval_system(sys, x, u_b(x), w);
  };
  return field;
}

Eigen::VectorXd embedding_field(const DecompositionFunction& d, const IntervalVector& W,
                                const EmbeddingState& a) {
  if (!W.finite()) {
    throw std::invalid_argument("embedding_field: W must be finite");
  }
  Eigen::VectorXd out(2 * a.dim());
  out.head(a.dim()) = d.d(a.under, W.lower(), a.over, W.upper());
  out.tail(a.dim()) = d.d(a.over, W.upper(), a.under, W.lower());
  return out;
}

IntegrationError::IntegrationError(Trajectory prefix)
    : std::runtime_error("integration produced a non-finite state"), prefix_(std::move(prefix)) {}

Eigen::VectorXd step_once(const TimeField& field, double t, const Eigen::VectorXd& x, double dt,
                          Integrator method) {
  switch (method) {
    case Integrator::euler:
      return x + dt * field(t, x);
    case Integrator::rk4: {
      const Eigen::VectorXd k1 = field(t, x);
      const Eigen::VectorXd k2 = field(t + 0.5 * dt, x + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = field(t + 0.5 * dt, x + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = field(t + dt, x + dt * k3);
      return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  throw std::logic_error("step_once: unknown integrator");
}

Trajectory integrate(const TimeField& field, const Eigen::VectorXd& x0, double horizon, double dt,
                     Integrator method) {
  if (horizon < 0.0) throw std::invalid_argument("integrate: horizon must be nonnegative");
  if (dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");

  Trajectory traj;
  traj.step = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  double t = 0.0;
  Eigen::VectorXd x = x0;
  long k = 0;
  while (t < horizon - 1e-12) {
    const double t_next = std::min(static_cast<double>(++k) * dt, horizon);
    x = step_once(field, t, x, t_next - t, method);
    t = t_next;
    if (!x.allFinite()) {
      throw IntegrationError(std::move(traj));
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate(const VectorFn& field, const Eigen::VectorXd& x0, double horizon, double dt,
                     Integrator method) {
  return integrate([&field](double, const Eigen::VectorXd& x) { return field(x); }, x0, horizon,
                   dt, method);
}

const char* to_string(DecompViolation::Kind kind) {
  switch (kind) {
    case DecompViolation::Kind::diagonal: return "diagonal";
    case DecompViolation::Kind::state_offdiag: return "state-offdiagonal";
    case DecompViolation::Kind::state_hat: return "state-hat";
    case DecompViolation::Kind::disturbance: return "disturbance";
    case DecompViolation::Kind::disturbance_hat: return "disturbance-hat";
  }
  return "?";
}

long DecompositionReport::count(DecompViolation::Kind kind) const {
  return std::count_if(violations.begin(), violations.end(),
                       [kind](const DecompViolation& v) { return v.kind == kind; });
}

std::string DecompositionReport::describe() const {
  std::ostringstream out;
  out << "decomposition check: " << samples << " samples, " << violations.size()
      << " violation(s)";
  if (!violations.empty()) {
    out << " [diag " << count(DecompViolation::Kind::diagonal) << ", d/dx "
        << count(DecompViolation::Kind::state_offdiag) << ", d/dxhat "
        << count(DecompViolation::Kind::state_hat) << ", d/dw "
        << count(DecompViolation::Kind::disturbance) << ", d/dwhat "
        << count(DecompViolation::Kind::disturbance_hat) << "]";
  }
  return out.str();
}

namespace {

// Central difference of d in one argument slot.
Eigen::VectorXd central_diff(const DecompositionFunction& d, Eigen::VectorXd x, Eigen::VectorXd w,
                             Eigen::VectorXd xh, Eigen::VectorXd wh, int slot, int j, double eps) {
  Eigen::VectorXd* arg = slot == 0 ? &x : slot == 1 ? &w : slot == 2 ? &xh : &wh;
  const double base = (*arg)[j];
  (*arg)[j] = base + eps;
  const Eigen::VectorXd hi = d.d(x, w, xh, wh);
  (*arg)[j] = base - eps;
  const Eigen::VectorXd lo = d.d(x, w, xh, wh);
  (*arg)[j] = base;
  return (hi - lo) / (2.0 * eps);
}

}  // namespace

DecompositionReport check_decomposition(const DecompositionFunction& d, const ClosedLoopField& F,
                                        const IntervalVector& box, const IntervalVector& W,
                                        long samples, std::uint64_t seed,
                                        const DecompositionCheckParams& params) {
  if (!box.finite() || !W.finite()) {
    throw std::invalid_argument("check_decomposition: box and W must be finite");
  }
  if (samples < 1) throw std::invalid_argument("check_decomposition: samples must be >= 1");

  DecompositionReport report;
  report.samples = samples;
  report.tol_sign = params.tol_sign;
  report.tol_diag = params.tol_diag;

  const int n = d.n;
  const int nw = d.n_w;
  auto rng = seeded_rng(seed);

  auto record = [&](DecompViolation::Kind kind, int i, int j, double magnitude,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& w, const Eigen::VectorXd& xh,
                    const Eigen::VectorXd& wh) {
    DecompViolation v;
    v.kind = kind;
    v.i = i;
    v.j = j;
    v.magnitude = magnitude;
    v.x = x;
    v.w = w;
    v.x_hat = xh;
    v.w_hat = wh;
    report.violations.push_back(std::move(v));
  };

  for (long s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = uniform_in_box(rng, box);
    const Eigen::VectorXd w = uniform_in_box(rng, W);
    const Eigen::VectorXd xh = uniform_in_box(rng, box);
    const Eigen::VectorXd wh = uniform_in_box(rng, W);

    // (i) diagonal consistency
    const Eigen::VectorXd diag_gap = d.d(x, w, x, w) - F.F(x, w);
    for (int i = 0; i < n; ++i) {
      if (std::abs(diag_gap[i]) > params.tol_diag) {
        record(DecompViolation::Kind::diagonal, i, -1, std::abs(diag_gap[i]), x, w, x, w);
      }
    }

    // (ii) d d_i / d x_j >= 0 for i != j
    for (int j = 0; j < n; ++j) {
      const double eps = params.eps_rel * (1.0 + std::abs(x[j]));
      const Eigen::VectorXd col = central_diff(d, x, w, xh, wh, 0, j, eps);
      for (int i = 0; i < n; ++i) {
        if (i != j && col[i] < -params.tol_sign) {
          record(DecompViolation::Kind::state_offdiag, i, j, -col[i], x, w, xh, wh);
        }
      }
    }

    // (iii) d d_i / d xhat_j <= 0 for all i, j
    for (int j = 0; j < n; ++j) {
      const double eps = params.eps_rel * (1.0 + std::abs(xh[j]));
      const Eigen::VectorXd col = central_diff(d, x, w, xh, wh, 2, j, eps);
      for (int i = 0; i < n; ++i) {
        if (col[i] > params.tol_sign) {
          record(DecompViolation::Kind::state_hat, i, j, col[i], x, w, xh, wh);
        }
      }
    }

    // (iv) d d_i / d w_k >= 0 and d d_i / d what_k <= 0
    for (int k = 0; k < nw; ++k) {
      const double eps_w = params.eps_rel * (1.0 + std::abs(w[k]));
      const Eigen::VectorXd col_w = central_diff(d, x, w, xh, wh, 1, k, eps_w);
      const double eps_wh = params.eps_rel * (1.0 + std::abs(wh[k]));
      const Eigen::VectorXd col_wh = central_diff(d, x, w, xh, wh, 3, k, eps_wh);
      for (int i = 0; i < n; ++i) {
        if (col_w[i] < -params.tol_sign) {
          record(DecompViolation::Kind::disturbance, i, k, -col_w[i], x, w, xh, wh);
        }
        if (col_wh[i] > params.tol_sign) {
          record(DecompViolation::Kind::disturbance_hat, i, k, col_wh[i], x, w, xh, wh);
        }
      }
    }
  }
  return report;
}

}  // namespace rta
