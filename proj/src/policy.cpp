#include "rta/policy.hpp"

#include <cmath>
#include <sstream>

#include "rta/signal.hpp"

namespace rta {

std::string BarrierCheckReport::describe() const {
  std::ostringstream out;
  out << "barrier check: " << samples << " samples, max gradient rel err " << max_grad_rel_err
      << ", worst midpoint-concavity gap " << worst_midpoint_gap << (ok() ? " (ok)" : " (FAIL)");
  return out.str();
}

BarrierCheckReport validate_barrier(const BarrierFunction& barrier, int samples,
                                    std::uint64_t seed) {
  BarrierCheckReport report;
  report.samples = samples;
  auto rng = seeded_rng(seed);
  const int n = barrier.concavity_domain.dim();

  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = uniform_in_box(rng, barrier.concavity_domain);
    const Eigen::VectorXd g = barrier.grad_h(x);
    Eigen::VectorXd g_fd(n);
    for (int i = 0; i < n; ++i) {
      const double eps = 1e-6 * (1.0 + std::abs(x[i]));
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += eps;
      xm[i] -= eps;
      g_fd[i] = (barrier.h(xp) - barrier.h(xm)) / (2.0 * eps);
    }
    const double rel = (g - g_fd).norm() / std::max(1.0, g.norm());
    report.max_grad_rel_err = std::max(report.max_grad_rel_err, rel);

    const Eigen::VectorXd y = uniform_in_box(rng, barrier.concavity_domain);
    const double gap = barrier.h(0.5 * (x + y)) - 0.5 * (barrier.h(x) + barrier.h(y));
    report.worst_midpoint_gap = std::min(report.worst_midpoint_gap, gap);
  }
  return report;
}

}  // namespace rta
