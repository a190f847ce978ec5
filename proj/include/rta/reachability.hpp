#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rta/dynamics.hpp"
#include "rta/intervals.hpp"
#include "rta/policy.hpp"

namespace rta {

// Time-indexed box trace of an embedding trajectory. A step is valid when the
// state is ordered, lies in X x X, and every earlier step was valid; once the
// hypothesis fails, all later steps stay flagged invalid (boxes are kept, not
// dropped, to preserve trace alignment for diagnostics).
struct ReachTube {
  std::vector<double> times;
  std::vector<EmbeddingState> states;
  std::vector<bool> valid;
  double dt{0.0};

  std::size_t size() const { return times.size(); }
  bool all_valid() const;
  // Index of the first invalid step, or -1 if the whole tube is valid.
  int first_invalid() const;
  // Largest time with a valid box (-1.0 if none, including step 0).
  double valid_horizon() const;
  // Box at a valid step.
  IntervalVector box(std::size_t k) const;
  IntervalVector terminal_box() const { return box(size() - 1); }
};

// Integrates the embedding system from (x0_box.lower, x0_box.upper) with rk4
// and returns the box trace; over-approximates the forward reachable set of
// the underlying disturbed system at every valid step. Non-finite blow-up
// truncates the tube with an invalid tail rather than raising.
ReachTube forward_overapprox(const DecompositionFunction& d, const IntervalVector& W,
                             const IntervalVector& x0_box, const IntervalVector& statespace,
                             double horizon, double dt);

struct McEndpoints {
  std::vector<Eigen::VectorXd> endpoints;  // terminal states of successful samples
  std::vector<int> failed;                 // sample indices that blew up
};

// Sampled under-approximation oracle for the reach set: per sample, draws a
// piecewise-linear disturbance signal and integrates F. Deterministic given
// the seed; per-sample RNG streams derive from (seed, sample index).
McEndpoints monte_carlo_endpoints(const ClosedLoopField& F, const Eigen::VectorXd& x0,
                                  const IntervalVector& W, double horizon, double dt,
                                  int n_samples, std::uint64_t seed, double segment = 0.25,
                                  Integrator method = Integrator::rk4);

struct BasinVerdict {
  bool demonstrated{false};
  double time{std::numeric_limits<double>::quiet_NaN()};
};

// Smallest grid time T with gamma_ideal(T; x) >= 0. A negative verdict is
// not evidence of non-membership; the implication is one-directional.
BasinVerdict basin_member(const std::vector<std::pair<double, double>>& gamma_ideal_trace);

// ---------------------------------------------------------------------------
// Unsafe sets and the backup-horizon check
// ---------------------------------------------------------------------------

// Unsafe region of the statespace. The coordinate-threshold form
// (|x_i| >= threshold for some listed i) admits exact box-disjointness tests;
// the generic predicate form is checked by sampling only.
struct UnsafeSet {
  std::vector<std::pair<int, double>> abs_thresholds;
  std::function<bool(const Eigen::VectorXd&)> predicate;

  bool exact() const { return !abs_thresholds.empty(); }
  bool contains(const Eigen::VectorXd& x) const;
};

struct BoxDisjointness {
  bool disjoint{false};
  // Exact form: min over listed coordinates of distance-to-threshold;
  // positive iff disjoint. NaN for the sampled form.
  double margin{std::numeric_limits<double>::quiet_NaN()};
  bool sound{false};
};

BoxDisjointness box_disjoint(const UnsafeSet& unsafe, const IntervalVector& box);

struct Assumption1Params {
  double dt{0.01};
  long mc_trials{10000};
  std::uint64_t mc_seed{90210};
  double signal_segment{0.25};
  // Max rejection draws when sampling a state inside the unsafe set.
  int mc_max_rejects{10000};
};

struct Assumption1Report {
  bool reverse_decomposition_available{false};
  bool overapprox_ran{false};
  // Tube fully valid, margins decided exactly, and disjoint throughout.
  bool overapprox_passed{false};
  bool overapprox_sound{false};
  double min_margin{std::numeric_limits<double>::quiet_NaN()};
  int tube_first_invalid{-1};
  long mc_trials{0};
  long mc_hits{0};
  std::vector<Eigen::VectorXd> mc_counterexamples;

  // "proven-by-overapproximation" | "falsification-only-no-counterexample" |
  // "falsified" | "unavailable"
  std::string verdict;
  bool passed() const;
  std::string describe() const;
};

// Checks that the T_b-second basin of attraction of S_b stays clear of the
// unsafe set. The sound path over-approximates the backward reachable set of
// S_b by running the forward embedding of the TIME-REVERSED backup field from
// a bounding box of S_b and testing every tube box against the unsafe set.
// A seeded Monte Carlo falsification pass (states sampled inside the unsafe
// set, backup rollouts checked for S_b entry within T_b) runs regardless; the
// report labels which verdict was achieved. Without d_reverse only the
// falsification pass runs and the verdict is explicitly not a proof.
Assumption1Report check_assumption1(const ClosedLoopField& F_backup,
                                    const std::optional<DecompositionFunction>& d_reverse,
                                    const BarrierFunction& h, const IntervalVector& W,
                                    const IntervalVector& sb_bounding_box, const UnsafeSet& unsafe,
                                    const IntervalVector& mc_sample_box,
                                    const IntervalVector& statespace, double T_b,
                                    const Assumption1Params& params = {});

}  // namespace rta
