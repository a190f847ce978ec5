#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "rta/barrier.hpp"
#include "rta/platoon.hpp"
#include "rta/signal.hpp"
#include "test_support.hpp"

using namespace rta;
using test::vec;

namespace {

PlatoonModel& platoon() {
  static PlatoonModel model = build_platoon();
  return model;
}

// single-step tube wrapping a fixed box, for direct gamma checks
ReachTube tube_of(const IntervalVector& box) {
  ReachTube tube;
  tube.times = {0.0};
  tube.states = {EmbeddingState::from_box(box)};
  tube.valid = {true};
  tube.dt = 0.01;
  return tube;
}

BarrierFunction linear_barrier(const Eigen::VectorXd& c, double offset) {
  BarrierFunction b;
  b.h = [c, offset](const Eigen::VectorXd& z) { return c.dot(z) + offset; };
  b.grad_h = [c](const Eigen::VectorXd&) { return c; };
  b.concavity_domain = IntervalVector::centered(Eigen::VectorXd::Constant(c.size(), 10.0));
  return b;
}

}  // namespace

TEST_CASE("lse identities and bounds") {
  SUBCASE("singleton is exact for any p") {
    for (double p : {1.0, 10.0, 1000.0}) {
      const double s = -0.37;
      CHECK(lse(std::vector{s}, p) == s);
    }
  }
  SUBCASE("two zeros at p = 1") {
    CHECK(lse(std::vector{0.0, 0.0}, 1.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("sharp p hugs the minimum from below") {
    const double v = lse(std::vector{1.0, 2.0}, 1000.0);
    CHECK(v >= 1.0 - std::log(2.0) / 1000.0);
    CHECK(v < 1.0);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(lse(std::vector<double>{}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lse(std::vector{1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lse(std::vector{1.0}, -2.0), std::invalid_argument);
  }
  SUBCASE("bound min - log(count)/p <= lse < min on random lists") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(1, 64);
    std::uniform_real_distribution<double> val(-50.0, 50.0);
    std::uniform_real_distribution<double> sharp(0.5, 2000.0);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> values(len(rng));
      for (auto& v : values) v = val(rng);
      const double p = sharp(rng);
      const double m = *std::min_element(values.begin(), values.end());
      const double soft = lse(values, p);
      CHECK(soft >= m - std::log(static_cast<double>(values.size())) / p - 1e-12);
      if (values.size() == 1) {
        CHECK(soft == m);
      } else {
        CHECK(soft < m);
      }
    }
  }
  SUBCASE("overflow safety far from zero") {
    CHECK(std::isfinite(lse(std::vector{-2000.0, -2000.5}, 1000.0)));
    CHECK(std::isfinite(lse(std::vector{3000.0, 3001.0}, 1000.0)));
  }
}

TEST_CASE("gamma_ideal") {
  const auto& model = platoon();

  SUBCASE("zero-width box evaluates h at the point") {
    const Eigen::VectorXd z0 = vec({0.1, -0.2, 0.3, 0.4, -0.5});
    const ReachTube tube = tube_of(IntervalVector::point(z0));
    CHECK(gamma_ideal(tube, model.policy.h, 0) ==
          doctest::Approx(model.policy.h.h(z0)).epsilon(1e-15));
  }

  SUBCASE("linear h attains its min at a vertex") {
    const BarrierFunction lin = linear_barrier(vec({1, 1}), 0.0);
    const ReachTube tube = tube_of(IntervalVector(vec({0, 0}), vec({1, 1})));
    CHECK(gamma_ideal(tube, lin, 0) == 0.0);
  }

  SUBCASE("vertex min equals the dense-sampling oracle under concavity") {
    const Eigen::VectorXd x0 = vec({-0.25, 0, 0.5, 0.25, 0.5});
    const ReachTube tube = embedding_tube(x0, model.decomposition, model.config.W,
                                          model.system.statespace, 0.5, 0.01);
    REQUIRE(tube.all_valid());
    const std::size_t last = tube.size() - 1;
    const double vertex_min = gamma_ideal(tube, model.policy.h, last);

    // oracle: min of h over dense interior samples plus the vertices; with a
    // concave h no interior sample may undercut the vertex min
    const IntervalVector box = tube.box(last);
    std::mt19937_64 rng(8);
    double oracle = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 100000; ++s) {
      Eigen::VectorXd z(box.dim());
      for (int i = 0; i < box.dim(); ++i) {
        std::uniform_real_distribution<double> dist(box.lower()[i], box.upper()[i]);
        z[i] = dist(rng);
      }
      oracle = std::min(oracle, model.policy.h.h(z));
    }
    for (const auto& z : corners(box)) oracle = std::min(oracle, model.policy.h.h(z));
    CHECK(vertex_min == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(vertex_min <= oracle + 1e-12);
  }

  SUBCASE("invalid steps yield the -inf sentinel") {
    ReachTube tube = tube_of(IntervalVector::point(vec({0, 0, 0, 0, 0})));
    tube.valid[0] = false;
    CHECK(gamma_ideal(tube, model.policy.h, 0) == kNegInf);
    CHECK(gamma_soft(tube, model.policy.h, 1000.0, 0) == kNegInf);
  }
}

TEST_CASE("gamma_soft sandwich") {
  const auto& model = platoon();
  const double p = model.config.p;
  const double n = 5.0;

  SUBCASE("zero-width box gives h(x) - (n/p) log 2") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.5, 1.5);
      const ReachTube tube = tube_of(IntervalVector::point(x));
      const double expected = model.policy.h.h(x) - (n / p) * std::log(2.0);
      CHECK(gamma_soft(tube, model.policy.h, p, 0) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("0.0034657 offset at p = 1000, n = 5") {
    CHECK((n / p) * std::log(2.0) == doctest::Approx(0.0034657359).epsilon(1e-7));
  }

  SUBCASE("sandwich along real tubes") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.0, 1.0);
      const ReachTube tube = embedding_tube(x, model.decomposition, model.config.W,
                                            model.system.statespace, 1.0, 0.01);
      for (std::size_t k = 0; k < tube.size(); k += 10) {
        if (!tube.valid[k]) continue;
        const double ideal = gamma_ideal(tube, model.policy.h, k);
        const double soft = gamma_soft(tube, model.policy.h, p, k);
        CHECK(soft >= ideal - (n / p) * std::log(2.0) - 1e-12);
        CHECK(soft < ideal);
        ++checked;
      }
    }
    CHECK(checked > 500);
  }
}

TEST_CASE("psi evaluation") {
  const auto& model = platoon();
  const PsiParams params{model.config.p, 0.01};

  SUBCASE("interior states certify immediately") {
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
    const PsiEvaluation eval =
        eval_psi(x, model.policy, model.decomposition, model.config.W, model.system.statespace,
                 params);
    const double gamma0 = model.policy.h.h(x) - (5.0 / params.p) * std::log(2.0);
    CHECK(eval.psi >= gamma0 - 1e-12);
    CHECK(eval.psi > 0.0);
  }

  SUBCASE("the reference initial state is certified") {
    const Eigen::VectorXd x0 = vec({-0.25, 0, 0.5, 0.25, 0.5});
    const PsiEvaluation eval = eval_psi(x0, model.policy, model.decomposition, model.config.W,
                                        model.system.statespace, params);
    CHECK(eval.psi >= 0.0);
    CHECK(eval.tau_star > 0.0);
    CHECK(eval.valid_horizon == doctest::Approx(model.config.T_b));
    CHECK(eval.gamma_trace.size() == 101);
  }

  SUBCASE("grid refinement is stable") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.0, 1.0);
      const PsiEvaluation coarse = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                            model.system.statespace, {params.p, 0.01});
      const PsiEvaluation fine = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, {params.p, 0.005});
      CHECK(std::abs(coarse.psi - fine.psi) < 1e-3);
    }
  }

  SUBCASE("repeated evaluation is bitwise identical") {
    const Eigen::VectorXd x = vec({0.2, -0.1, 0.3, 0.6, -0.4});
    const PsiEvaluation a = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                     model.system.statespace, params);
    const PsiEvaluation b = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                     model.system.statespace, params);
    CHECK(a.psi == b.psi);
    CHECK(a.tau_star == b.tau_star);
  }

  SUBCASE("Lemma 2: psi >= 0 implies psi_ideal >= 0") {
    std::mt19937_64 rng(7);
    int hits = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.2, 1.2);
      const PsiEvaluation eval = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
      const double ideal = eval_psi_ideal(x, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
      CHECK(eval.psi < ideal);  // strict under-approximation
      if (eval.psi >= 0.0) {
        CHECK(ideal >= 0.0);
        ++hits;
      }
    }
    CHECK(hits > 0);
  }

  SUBCASE("states outside the statespace are rejected") {
    PlatoonConfig cfg = PlatoonConfig::defaults();
    PlatoonModel bounded = build_platoon(cfg);
    bounded.system.statespace = IntervalVector::centered(Eigen::VectorXd::Constant(5, 1.0));
    CHECK_THROWS_AS(eval_psi(vec({5, 0, 0, 0, 0}), bounded.policy, bounded.decomposition,
                             bounded.config.W, bounded.system.statespace, params),
                    std::invalid_argument);
  }
}

TEST_CASE("grad_psi") {
  const auto& model = platoon();
  const PsiParams params{model.config.p, 0.01};

  SUBCASE("linear h with frozen dynamics returns grad_h exactly") {
    // d == 0 is a valid decomposition of xdot = 0; the flow is the identity
    DecompositionFunction frozen;
    frozen.n = 2;
    frozen.n_w = 1;
    frozen.d = [](const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::VectorXd&,
                  const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(x.size()).eval(); };
    BackupPolicy policy;
    policy.u_b = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
    policy.h = linear_barrier(vec({2.0, -3.0}), 1.0);
    policy.alpha = [](double v) { return v; };
    policy.T_b = 0.1;
    const IntervalVector W(vec({-0.1}), vec({0.1}));
    const IntervalVector space = IntervalVector::unbounded(2);

    const Eigen::VectorXd x = vec({0.4, -0.2});
    const PsiEvaluation eval = eval_psi(x, policy, frozen, W, space, PsiParams{100.0, 0.01});
    CHECK(eval.tau_star == 0.0);
    CHECK(eval.tau_tie);  // gamma is constant over the grid

    for (GradPath path : {GradPath::direct, GradPath::chain_rule}) {
      const Eigen::VectorXd g = grad_psi(x, eval, policy, frozen, W, space,
                                         PsiParams{100.0, 0.01}, path);
      CHECK(g.isApprox(vec({2.0, -3.0}), 1e-9));
    }
  }

  SUBCASE("the two computation paths agree") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.2, 1.2);
      const PsiEvaluation eval = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
      const Eigen::VectorXd direct = grad_psi(x, eval, model.policy, model.decomposition,
                                              model.config.W, model.system.statespace, params,
                                              GradPath::direct);
      const Eigen::VectorXd chain = grad_psi(x, eval, model.policy, model.decomposition,
                                             model.config.W, model.system.statespace, params,
                                             GradPath::chain_rule);
      CHECK((direct - chain).norm() / std::max(1e-12, direct.norm()) < 1e-4);
    }
  }

  SUBCASE("finite differences of psi confirm the gradient where tau* is stable") {
    std::mt19937_64 rng(10);
    int tested = 0;
    for (int trial = 0; trial < 60 && tested < 5; ++trial) {
      const Eigen::VectorXd x = test::random_vector(rng, 5, -1.0, 1.0);
      const PsiEvaluation eval = eval_psi(x, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
      if (!std::isfinite(eval.tau_star)) continue;

      const double fd_step = 1e-4;
      Eigen::VectorXd fd(5);
      bool tau_stable = true;
      for (int i = 0; i < 5 && tau_stable; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += fd_step;
        xm[i] -= fd_step;
        const PsiEvaluation ep = eval_psi(xp, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
        const PsiEvaluation em = eval_psi(xm, model.policy, model.decomposition, model.config.W,
                                          model.system.statespace, params);
        tau_stable = ep.tau_star == eval.tau_star && em.tau_star == eval.tau_star;
        fd[i] = (ep.psi - em.psi) / (2 * fd_step);
      }
      if (!tau_stable) continue;
      const Eigen::VectorXd g = grad_psi(x, eval, model.policy, model.decomposition,
                                         model.config.W, model.system.statespace, params);
      CHECK((g - fd).norm() / std::max(1e-12, fd.norm()) < 1e-2);
      ++tested;
    }
    CHECK(tested == 5);
  }

  SUBCASE("gradient requires a finite maximizer") {
    PsiEvaluation empty;
    CHECK_THROWS_AS(grad_psi(vec({0, 0, 0, 0, 0}), empty, model.policy, model.decomposition,
                             model.config.W, model.system.statespace, params),
                    std::invalid_argument);
  }
}

TEST_CASE("backup rollouts from certified states reach and keep S_b") {
  // Proposition-2 consequence, sampled: Psi_ideal(x) >= 0 implies every
  // seeded backup rollout enters S_b by T_b and stays through 2 T_b.
  const auto& model = platoon();
  const PsiParams params{model.config.p, 0.01};

  std::mt19937_64 rng(20);
  std::vector<Eigen::VectorXd> certified;
  certified.push_back(vec({-0.25, 0, 0.5, 0.25, 0.5}));
  while (certified.size() < 6) {
    const Eigen::VectorXd x = test::random_vector(rng, 5, -1.5, 1.5);
    if (eval_psi_ideal(x, model.policy, model.decomposition, model.config.W,
                       model.system.statespace, params) >= 0.0) {
      certified.push_back(x);
    }
  }

  for (const auto& x : certified) {
    for (int s = 0; s < 10; ++s) {
      const auto sig = DisturbanceSignal::piecewise_linear(mix_seed(500, s), model.config.W,
                                                           2 * model.config.T_b);
      const Trajectory traj = integrate(
          [&](double t, const Eigen::VectorXd& z) { return model.backup_loop.F(z, sig(t)); }, x,
          2 * model.config.T_b, 0.01, Integrator::rk4);
      double entered_at = -1.0;
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const double h = model.policy.h.h(traj.states[k]);
        if (entered_at < 0.0 && h >= 0.0) entered_at = traj.times[k];
        if (entered_at >= 0.0) CHECK(h >= -1e-6);
      }
      REQUIRE(entered_at >= 0.0);
      CHECK(entered_at <= model.config.T_b + 1e-12);
    }
  }
}
