#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

#include "rta/intervals.hpp"

namespace rta {

// Stateless mixing of (seed, stream) into an independent generator seed, so
// per-sample RNG streams are reproducible regardless of evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Uniform draw from a finite box.
Eigen::VectorXd uniform_in_box(std::mt19937_64& rng, const IntervalVector& box);

// Lipschitz disturbance realization: piecewise-linear interpolation between
// i.i.d. uniform knots on W, spaced by `segment` seconds. Values stay in W
// for all t (convex combinations of in-box knots); deterministic per seed.
class DisturbanceSignal {
public:
  static DisturbanceSignal piecewise_linear(std::uint64_t seed, const IntervalVector& W,
                                            double horizon, double segment = 0.25);

  Eigen::VectorXd operator()(double t) const;

  double segment() const { return segment_; }
  double horizon() const { return horizon_; }
  const std::vector<Eigen::VectorXd>& knots() const { return knots_; }

private:
  double segment_{0.25};
  double horizon_{0.0};
  std::vector<Eigen::VectorXd> knots_;
};

}  // namespace rta
