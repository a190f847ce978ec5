#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rta/asif.hpp"
#include "rta/dynamics.hpp"
#include "rta/intervals.hpp"
#include "rta/policy.hpp"
#include "rta/reachability.hpp"

namespace rta {

// N-vehicle platoon on an incidence graph: velocity states x in R^N with
// friction beta and additive disturbance, displacement states z = A^T p in
// R^K. The backup controller is a saturating tanh spring per edge and the
// safe set is a Lyapunov sublevel set {V <= delta}.
struct PlatoonConfig {
  int N{3};
  Eigen::MatrixXd A;  // N x K incidence matrix
  double beta{-1.0};
  double kappa{2.0};
  double sigma{0.5};
  double delta{2.25};
  IntervalVector W;  // disturbance box, dimension N
  double p{1000.0};
  double T_b{1.0};
  double z_limit{8.0};

  // The bundled 3-cart / 2-edge reference configuration.
  static PlatoonConfig defaults();

  int edges() const { return static_cast<int>(A.cols()); }
  int state_dim() const { return N + edges(); }
  void validate() const;  // throws std::invalid_argument
};

// Entrywise positive/negative split with A = A_plus + A_minus.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> incidence_parts(const Eigen::MatrixXd& A);

// Lyapunov matrix of the local linearization: blocks
// [kappa sigma I + A A^T, -beta A; -beta A^T, (kappa^2 sigma^2 + beta^2) I
//  + kappa sigma A^T A]. Symmetric by construction.
Eigen::MatrixXd lyapunov_matrix(const PlatoonConfig& cfg);

struct PlatoonModel {
  PlatoonConfig config;
  ControlAffineSystem system;
  BackupPolicy policy;
  DecompositionFunction decomposition;
  // Decomposition of the time-reversed backup field, used by the
  // assumption-1 backward check.
  DecompositionFunction reverse_decomposition;
  ClosedLoopField backup_loop;
  Eigen::MatrixXd P;
  double lambda_min{0.0};
  // Coordinate-wise bound of S_b: half-width sqrt(delta / lambda_min(P)).
  IntervalVector sb_bounding_box;
  UnsafeSet unsafe;
  // Default sampling region for assumption-1 falsification.
  IntervalVector falsification_box;
};

// Assembles the system, backup policy, decomposition functions, Lyapunov
// data and unsafe set from a validated config. Throws if P fails the
// numerical positive-definiteness check (h = delta - V would not be concave).
PlatoonModel build_platoon(const PlatoonConfig& cfg = PlatoonConfig::defaults());

struct InvarianceViolation {
  Eigen::VectorXd x, w;
  double margin{0.0};
};

struct InvarianceReport {
  long samples{0};
  double worst_margin{std::numeric_limits<double>::infinity()};
  Eigen::VectorXd worst_state, worst_vertex;
  std::vector<InvarianceViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

// Samples the Lyapunov shell h in [0, delta] (rejection from the bounding
// box, with half the budget concentrated near the h = 0 boundary where the
// rate condition is tight) and checks grad h . F_b(x, w) >= -alpha(h(x)) at
// every disturbance vertex.
InvarianceReport verify_backup_invariance(const PlatoonModel& model, long n_samples,
                                          std::uint64_t seed);

}  // namespace rta
