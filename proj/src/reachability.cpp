#include "rta/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rta/signal.hpp"

namespace rta {

bool ReachTube::all_valid() const {
  return std::all_of(valid.begin(), valid.end(), [](bool v) { return v; });
}

int ReachTube::first_invalid() const {
  for (std::size_t k = 0; k < valid.size(); ++k) {
    if (!valid[k]) return static_cast<int>(k);
  }
  return -1;
}

double ReachTube::valid_horizon() const {
  double horizon = -1.0;
  for (std::size_t k = 0; k < valid.size(); ++k) {
    if (valid[k]) horizon = times[k];
  }
  return horizon;
}

IntervalVector ReachTube::box(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("ReachTube::box: step out of range");
  if (!valid[k]) throw std::invalid_argument("ReachTube::box: step is invalid");
  return rect_of(states[k]);
}

namespace {

bool in_embedding_statespace(const EmbeddingState& a, const IntervalVector& statespace) {
  return statespace.contains(a.under) && statespace.contains(a.over);
}

}  // namespace

ReachTube forward_overapprox(const DecompositionFunction& d, const IntervalVector& W,
                             const IntervalVector& x0_box, const IntervalVector& statespace,
                             double horizon, double dt) {
  if (!x0_box.finite()) {
    throw std::invalid_argument("forward_overapprox: initial box must be finite");
  }
  if (horizon < 0.0) throw std::invalid_argument("forward_overapprox: horizon must be >= 0");
  if (dt <= 0.0) throw std::invalid_argument("forward_overapprox: dt must be positive");

  const auto field = [&](double, const Eigen::VectorXd& a_stacked) {
    return embedding_field(d, W, EmbeddingState::from_stacked(a_stacked));
  };

  ReachTube tube;
  tube.dt = dt;
  EmbeddingState a = EmbeddingState::from_box(x0_box);
  bool alive = true;  // Prop. 1 hypothesis still holds up to the current step
  bool finite = true;

  double t = 0.0;
  long k = 0;
  tube.times.push_back(0.0);
  tube.states.push_back(a);
  tube.valid.push_back(alive = ordered(a) && in_embedding_statespace(a, statespace));

  while (t < horizon - 1e-12) {
    const double t_next = std::min(static_cast<double>(++k) * dt, horizon);
    if (finite) {
      const Eigen::VectorXd next = step_once(field, t, a.stacked(), t_next - t, Integrator::rk4);
      if (next.allFinite()) {
        a = EmbeddingState::from_stacked(next);
      } else {
        finite = false;  // freeze the last finite state, invalidate the tail
      }
    }
    t = t_next;
    alive = alive && finite && ordered(a) && in_embedding_statespace(a, statespace);
    tube.times.push_back(t);
    tube.states.push_back(a);
    tube.valid.push_back(alive);
  }
  return tube;
}

McEndpoints monte_carlo_endpoints(const ClosedLoopField& F, const Eigen::VectorXd& x0,
                                  const IntervalVector& W, double horizon, double dt,
                                  int n_samples, std::uint64_t seed, double segment,
                                  Integrator method) {
  if (n_samples < 1) throw std::invalid_argument("monte_carlo_endpoints: n_samples must be >= 1");
  McEndpoints out;
  out.endpoints.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    const auto signal =
        DisturbanceSignal::piecewise_linear(mix_seed(seed, static_cast<std::uint64_t>(s)), W,
                                            horizon, segment);
    const TimeField field = [&](double t, const Eigen::VectorXd& x) { return F.F(x, signal(t)); };
    try {
      out.endpoints.push_back(integrate(field, x0, horizon, dt, method).terminal());
    } catch (const IntegrationError&) {
      out.failed.push_back(s);
    }
  }
  return out;
}

BasinVerdict basin_member(const std::vector<std::pair<double, double>>& gamma_ideal_trace) {
  if (gamma_ideal_trace.empty()) {
    throw std::invalid_argument("basin_member: empty trace");
  }
  for (const auto& [tau, value] : gamma_ideal_trace) {
    if (value >= 0.0) return {true, tau};
  }
  return {};
}

bool UnsafeSet::contains(const Eigen::VectorXd& x) const {
  for (const auto& [i, threshold] : abs_thresholds) {
    if (std::abs(x[i]) >= threshold) return true;
  }
  if (predicate && predicate(x)) return true;
  return false;
}

BoxDisjointness box_disjoint(const UnsafeSet& unsafe, const IntervalVector& box) {
  BoxDisjointness result;
  if (unsafe.exact() && !unsafe.predicate) {
    // box avoids {|x_i| >= thr} iff upper_i < thr and lower_i > -thr
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& [i, threshold] : unsafe.abs_thresholds) {
      margin = std::min(margin, threshold - box.upper()[i]);
      margin = std::min(margin, box.lower()[i] + threshold);
    }
    result.sound = true;
    result.margin = margin;
    result.disjoint = margin > 0.0;
    return result;
  }
  // Generic predicate: corner + center sampling, not sound.
  result.sound = false;
  for (const auto& z : corners(box)) {
    if (unsafe.contains(z)) return result;
  }
  if (unsafe.contains(box.center())) return result;
  result.disjoint = true;
  return result;
}

bool Assumption1Report::passed() const {
  if (mc_hits > 0) return false;
  return overapprox_passed || mc_trials > 0;
}

std::string Assumption1Report::describe() const {
  std::ostringstream out;
  out << "assumption-1 check (backup horizon):\n";
  if (!reverse_decomposition_available) {
    out << "  over-approximation: unavailable (no reverse decomposition function); "
           "NOT a proof\n";
  } else if (overapprox_passed) {
    out << "  over-approximation: PASS, min margin " << min_margin
        << (overapprox_sound ? " (sound)" : " (sampled, not sound)") << "\n";
  } else {
    out << "  over-approximation: inconclusive";
    if (tube_first_invalid >= 0) out << " (tube invalid from step " << tube_first_invalid << ")";
    if (std::isfinite(min_margin)) out << ", min margin " << min_margin;
    out << "\n";
  }
  out << "  falsification: " << mc_hits << " counterexample(s) in " << mc_trials << " trials\n";
  out << "  verdict: " << verdict;
  return out.str();
}

Assumption1Report check_assumption1(const ClosedLoopField& F_backup,
                                    const std::optional<DecompositionFunction>& d_reverse,
                                    const BarrierFunction& h, const IntervalVector& W,
                                    const IntervalVector& sb_bounding_box, const UnsafeSet& unsafe,
                                    const IntervalVector& mc_sample_box,
                                    const IntervalVector& statespace, double T_b,
                                    const Assumption1Params& params) {
  Assumption1Report report;
  report.reverse_decomposition_available = d_reverse.has_value();

  if (d_reverse) {
    // Backward reach of S_b under F equals forward reach of the reversed
    // field; propagate the bounding box of S_b through its embedding.
    const ReachTube tube =
        forward_overapprox(*d_reverse, W, sb_bounding_box, statespace, T_b, params.dt);
    report.overapprox_ran = true;
    report.tube_first_invalid = tube.first_invalid();
    bool all_disjoint = true;
    bool all_sound = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tube.size(); ++k) {
      if (!tube.valid[k]) {
        all_disjoint = false;
        break;
      }
      const BoxDisjointness dj = box_disjoint(unsafe, tube.box(k));
      all_sound = all_sound && dj.sound;
      if (dj.sound) min_margin = std::min(min_margin, dj.margin);
      all_disjoint = all_disjoint && dj.disjoint;
    }
    report.min_margin =
        std::isfinite(min_margin) ? min_margin : std::numeric_limits<double>::quiet_NaN();
    report.overapprox_sound = all_sound && tube.all_valid();
    report.overapprox_passed = all_disjoint && tube.all_valid();
  }

  // Monte Carlo falsification: a state in the unsafe set whose backup rollout
  // enters S_b within T_b contradicts the basin/unsafe disjointness.
  for (long trial = 0; trial < params.mc_trials; ++trial) {
    auto rng = seeded_rng(params.mc_seed, static_cast<std::uint64_t>(trial));
    Eigen::VectorXd x0;
    bool found = false;
    for (int attempt = 0; attempt < params.mc_max_rejects; ++attempt) {
      x0 = uniform_in_box(rng, mc_sample_box);
      if (unsafe.contains(x0)) {
        found = true;
        break;
      }
    }
    if (!found) continue;
    report.mc_trials++;

    const auto signal = DisturbanceSignal::piecewise_linear(
        mix_seed(params.mc_seed ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(trial)), W, T_b,
        params.signal_segment);
    const TimeField field = [&](double t, const Eigen::VectorXd& x) {
      return F_backup.F(x, signal(t));
    };
    try {
      const Trajectory rollout = integrate(field, x0, T_b, params.dt, Integrator::rk4);
      for (const auto& state : rollout.states) {
        if (h.h(state) >= 0.0) {
          report.mc_hits++;
          report.mc_counterexamples.push_back(x0);
          break;
        }
      }
    } catch (const IntegrationError&) {
      // Blow-up cannot enter the compact S_b; the trial counts, not a hit.
    }
  }

  if (report.mc_hits > 0) {
    report.verdict = "falsified";
  } else if (report.overapprox_passed) {
    report.verdict = "proven-by-overapproximation";
  } else if (report.mc_trials > 0) {
    report.verdict = "falsification-only-no-counterexample";
  } else {
    report.verdict = "unavailable";
  }
  return report;
}

}  // namespace rta
