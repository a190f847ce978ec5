#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rta/intervals.hpp"

namespace rta {

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using Feedback = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Control-affine system xdot = f(x) + g1(x) u + g2(x) w with statespace X
// (extended box) and finite disturbance box W.
struct ControlAffineSystem {
  int n{0}, m{0}, n_w{0};
  VectorFn f;
  MatrixFn g1, g2;
  IntervalVector statespace;
  IntervalVector W;
};

Eigen::VectorXd eval_system(const ControlAffineSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& w);

// Autonomous disturbed field xdot = F(x, w), typically a closed loop.
struct ClosedLoopField {
  int n{0}, n_w{0};
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> F;
};

ClosedLoopField close_loop(const ControlAffineSystem& sys, Feedback u_b);

// Decomposition function d(x, w, xhat, what) agreeing with the dynamics on
// its diagonal and monotone in the off-diagonal arguments.
struct DecompositionFunction {
  int n{0}, n_w{0};
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& x_hat, const Eigen::VectorXd& w_hat)>
      d;
};

// Right-hand side of the 2n-dimensional embedding system:
// (d(under, w_lo, over, w_hi), d(over, w_hi, under, w_lo)).
Eigen::VectorXd embedding_field(const DecompositionFunction& d, const IntervalVector& W,
                                const EmbeddingState& a);

enum class Integrator { euler, rk4 };

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  double step{0.0};

  std::size_t size() const { return times.size(); }
  const Eigen::VectorXd& terminal() const { return states.back(); }
};

using TimeField = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Thrown when integration produces a non-finite state; carries the last
// finite prefix of the trajectory.
class IntegrationError : public std::runtime_error {
public:
  explicit IntegrationError(Trajectory prefix);
  const Trajectory& prefix() const { return prefix_; }

private:
  Trajectory prefix_;
};

// Fixed-step integration over [0, horizon]; the final step is shortened so
// the trajectory lands on the horizon exactly.
Trajectory integrate(const TimeField& field, const Eigen::VectorXd& x0, double horizon, double dt,
                     Integrator method = Integrator::rk4);

// Convenience overload for autonomous fields.
Trajectory integrate(const VectorFn& field, const Eigen::VectorXd& x0, double horizon, double dt,
                     Integrator method = Integrator::rk4);

// Single step of the chosen scheme, exposed for callers that run their own
// loops (reach tubes, simulations).
Eigen::VectorXd step_once(const TimeField& field, double t, const Eigen::VectorXd& x, double dt,
                          Integrator method);

// ---------------------------------------------------------------------------
// Empirical decomposition-function validation
// ---------------------------------------------------------------------------

struct DecompViolation {
  enum class Kind {
    diagonal,          // |d(x,w,x,w) - F(x,w)| > tol_diag
    state_offdiag,     // d d_i / d x_j < -tol_sign, i != j
    state_hat,         // d d_i / d xhat_j > tol_sign
    disturbance,       // d d_i / d w_k < -tol_sign
    disturbance_hat,   // d d_i / d what_k > tol_sign
  };
  Kind kind;
  int i{-1}, j{-1};
  double magnitude{0.0};
  Eigen::VectorXd x, w, x_hat, w_hat;
};

const char* to_string(DecompViolation::Kind kind);

struct DecompositionReport {
  long samples{0};
  double tol_sign{0.0}, tol_diag{0.0};
  std::vector<DecompViolation> violations;

  bool ok() const { return violations.empty(); }
  long count(DecompViolation::Kind kind) const;
  std::string describe() const;
};

struct DecompositionCheckParams {
  // Central-difference step is eps_rel * (1 + |coordinate|).
  double eps_rel{1e-5};
  // Sign defects below this are ignored (d is Lipschitz, not necessarily C1).
  double tol_sign{1e-6};
  double tol_diag{1e-7};
};

// Samples seeded random tuples (x, w, xhat, what) in box x W x box x W and
// checks the diagonal identity plus the four monotonicity sign conditions by
// central finite differences. Violations are data, not errors.
DecompositionReport check_decomposition(const DecompositionFunction& d, const ClosedLoopField& F,
                                        const IntervalVector& box, const IntervalVector& W,
                                        long samples, std::uint64_t seed,
                                        const DecompositionCheckParams& params = {});

}  // namespace rta
