#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>

#include "rta/dynamics.hpp"
#include "rta/intervals.hpp"

namespace rta {

// Concave barrier h with gradient; S = {h >= 0}. concavity_domain is the
// (finite) region sampled when validating concavity empirically.
struct BarrierFunction {
  std::function<double(const Eigen::VectorXd&)> h;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_h;
  IntervalVector concavity_domain;
};

struct BarrierCheckReport {
  int samples{0};
  double max_grad_rel_err{0.0};
  double worst_midpoint_gap{0.0};  // most negative value of h(mid) - (h(x)+h(y))/2

  bool ok() const { return max_grad_rel_err <= 1e-5 && worst_midpoint_gap >= -1e-9; }
  std::string describe() const;
};

// Finite-difference gradient consistency and midpoint concavity on sampled
// points of the concavity domain.
BarrierCheckReport validate_barrier(const BarrierFunction& barrier, int samples,
                                    std::uint64_t seed);

// Backup controller u_b with its invariant region S_b = {h >= 0}, class-K
// rate alpha (defined on all of R) and backup horizon T_b.
struct BackupPolicy {
  Feedback u_b;
  BarrierFunction h;
  std::function<double(double)> alpha;
  double T_b{1.0};
};

}  // namespace rta
