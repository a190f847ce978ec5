#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rta/harness.hpp"
#include "test_support.hpp"

using namespace rta;
using test::vec;

namespace {

PlatoonModel& platoon() {
  static PlatoonModel model = build_platoon();
  return model;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// minimal well-formedness scan: every opened tag is closed in order
bool well_formed_markup(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = text.find('<', i)) != std::string::npos) {
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;      // declaration / comment
    if (tag.back() == '/') continue;                   // self-closing
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      const std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("disturbance signals") {
  const IntervalVector W = platoon().config.W;

  SUBCASE("degenerate W gives a constant signal") {
    const auto sig = disturbance_signal(5, IntervalVector::point(vec({0.07, -0.02, 0.0})), 2.0);
    for (double t : {0.0, 0.3, 1.11, 2.0}) {
      CHECK(sig(t) == vec({0.07, -0.02, 0.0}));
    }
  }
  SUBCASE("values stay inside W on a dense grid") {
    const auto sig = disturbance_signal(6, W, 4.0);
    for (int k = 0; k <= 4000; ++k) {
      CHECK(W.contains(sig(k * 0.001)));
    }
  }
  SUBCASE("same seed reproduces the signal bitwise") {
    const auto a = disturbance_signal(7, W, 4.0);
    const auto b = disturbance_signal(7, W, 4.0);
    for (int k = 0; k <= 400; ++k) {
      CHECK(a(k * 0.01) == b(k * 0.01));
    }
  }
  SUBCASE("knot spacing bounds the slope") {
    const auto sig = disturbance_signal(8, W, 2.0, 0.25);
    const double lipschitz = W.width().maxCoeff() / 0.25;
    for (int k = 0; k < 2000; ++k) {
      const double t = k * 0.001;
      CHECK(((sig(t + 0.001) - sig(t)) / 0.001).cwiseAbs().maxCoeff() <= lipschitz + 1e-9);
    }
  }
}

TEST_CASE("reference simulation reproduces the study behavior") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 12;
  const TrajectoryRecord record = run_simulation(cfg, platoon());

  CHECK(record.rows.size() == 401);
  CHECK_FALSE(record.unsafe_flag);
  CHECK_FALSE(record.error_flag);
  CHECK(record.max_abs_z() < 8.0);
  // the filter lets the system leave S_b while staying safe
  CHECK(record.min_h() < 0.0);
  CHECK(record.count(FilterStatus::passed_desired) > 0);
  CHECK(record.count(FilterStatus::projected) > 0);
  // the certificate is recorded every step in asif mode
  for (const auto& row : record.rows) {
    CHECK(std::isfinite(row.psi));
  }
}

TEST_CASE("desired-only mode decays from a safe interior state without disturbance") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.controller_mode = ControllerMode::desired_only;
  cfg.desired_input.name = "zero";
  cfg.platoon.W = IntervalVector::point(Eigen::VectorXd::Zero(3));
  cfg.x0 = vec({0.2, -0.1, 0.15, 0.3, -0.2});
  cfg.horizon = 6.0;
  const TrajectoryRecord record = run_simulation(cfg);
  CHECK(record.rows.back().state.norm() < 0.1 * cfg.x0.norm());
  for (const auto& row : record.rows) CHECK(row.status == FilterStatus::raw);
}

TEST_CASE("backup-only mode reaches S_b within the backup time and stays") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.controller_mode = ControllerMode::backup_only;
  cfg.seed = 9;
  cfg.horizon = 2.0;
  const TrajectoryRecord record = run_simulation(cfg, platoon());

  double entered_at = -1.0;
  for (const auto& row : record.rows) {
    if (entered_at < 0.0 && row.h >= 0.0) entered_at = row.t;
    if (entered_at >= 0.0) CHECK(row.h >= -1e-4);
  }
  REQUIRE(entered_at >= 0.0);
  CHECK(entered_at <= platoon().config.T_b);
}

TEST_CASE("vanilla filter confines the trajectory while the asif releases it") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 12;
  cfg.horizon = 2.0;

  cfg.controller_mode = ControllerMode::vanilla_cbf;
  const TrajectoryRecord vanilla = run_simulation(cfg, platoon());
  cfg.controller_mode = ControllerMode::asif;
  const TrajectoryRecord asif = run_simulation(cfg, platoon());

  CHECK(vanilla.min_h() > -0.05);  // S_b held up to discretization
  CHECK(asif.min_h() < -0.5);      // the look-ahead filter leaves S_b
  CHECK((vanilla.rows.back().state - asif.rows.back().state).norm() > 0.01);
  CHECK_FALSE(vanilla.unsafe_flag);
  CHECK_FALSE(asif.unsafe_flag);
}

TEST_CASE("csv export") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 3;
  cfg.horizon = 0.02;  // 2 steps -> 3 rows
  const TrajectoryRecord record = run_simulation(cfg, platoon());
  REQUIRE(record.rows.size() == 3);

  const auto path = temp_file("rta_test_export.csv");
  export_csv(record, path);

  SUBCASE("one header line plus one line per step") {
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.rfind("t,x1,x2,x3,z1,z2,u1,u2,ud1,ud2,w1,w2,w3,psi,h,status", 0) == 0);
  }

  SUBCASE("round-trip within 1e-9 per field") {
    const TrajectoryRecord parsed = import_csv(path);
    REQUIRE(parsed.rows.size() == record.rows.size());
    for (std::size_t k = 0; k < record.rows.size(); ++k) {
      const auto& a = record.rows[k];
      const auto& b = parsed.rows[k];
      CHECK(std::abs(a.t - b.t) <= 1e-9);
      CHECK((a.state - b.state).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((a.u_applied - b.u_applied).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((a.u_desired - b.u_desired).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((a.w - b.w).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(std::abs(a.psi - b.psi) <= 1e-9 * std::max(1.0, std::abs(a.psi)));
      CHECK(std::abs(a.h - b.h) <= 1e-9);
      CHECK(a.status == b.status);
    }
  }

  SUBCASE("same seed writes byte-identical files") {
    const TrajectoryRecord again = run_simulation(cfg, platoon());
    const auto path2 = temp_file("rta_test_export2.csv");
    export_csv(again, path2);
    CHECK(slurp(path) == slurp(path2));
  }

  std::filesystem::remove(path);
  std::filesystem::remove(temp_file("rta_test_export2.csv"));
}

TEST_CASE("plot export") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 3;
  cfg.horizon = 0.5;
  const TrajectoryRecord record = run_simulation(cfg, platoon());

  const auto path = temp_file("rta_test_plot.svg");
  export_plot(record, platoon(), path);
  const std::string text = slurp(path);

  CHECK(well_formed_markup(text));
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("unsafe limit") != std::string::npos);
  CHECK(text.find("S_b extent") != std::string::npos);

  SUBCASE("a single-row record still renders") {
    TrajectoryRecord tiny = record;
    tiny.rows.resize(1);
    const auto tiny_path = temp_file("rta_test_plot_tiny.svg");
    export_plot(tiny, platoon(), tiny_path);
    CHECK(well_formed_markup(slurp(tiny_path)));
    std::filesystem::remove(tiny_path);
  }
  std::filesystem::remove(path);
}

TEST_CASE("config ingestion is fail-closed") {
  SUBCASE("unknown top-level key") {
    CHECK_THROWS_AS(SimulationConfig::from_json_text(R"({"horizons": 4.0})"), ConfigError);
  }
  SUBCASE("unknown nested key") {
    CHECK_THROWS_AS(SimulationConfig::from_json_text(R"({"platoon": {"Nv": 3}})"), ConfigError);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(SimulationConfig::from_json_text("{"), ConfigError);
  }
  SUBCASE("bad mode name") {
    CHECK_THROWS_AS(SimulationConfig::from_json_text(R"({"controller_mode": "asifx"})"),
                    ConfigError);
  }
  SUBCASE("x0 dimension checked against the platoon") {
    CHECK_THROWS_AS(SimulationConfig::from_json_text(R"({"x0": [1, 2]})"), ConfigError);
  }
  SUBCASE("a full document round-trips the reference values") {
    const SimulationConfig cfg = SimulationConfig::from_json_text(R"({
      "platoon": {
        "N": 3,
        "A": [[-1, 0], [1, -1], [0, 1]],
        "beta": -1.0, "kappa": 2.0, "sigma": 0.5, "delta": 2.25,
        "W": {"lower": [-0.1, -0.1, -0.1], "upper": [0.1, 0.1, 0.1]},
        "p": 1000.0, "T_b": 1.0, "z_limit": 8.0
      },
      "horizon": 4.0, "dt": 0.01, "controller_mode": "asif", "seed": 17,
      "x0": [-0.25, 0.0, 0.5, 0.25, 0.5],
      "desired_input": {"name": "reference"},
      "dt_embed": 0.01, "output_path": "run.csv"
    })");
    CHECK(cfg.seed == 17);
    CHECK(cfg.controller_mode == ControllerMode::asif);
    CHECK(cfg.platoon.delta == 2.25);
    CHECK(cfg.x0 == vec({-0.25, 0.0, 0.5, 0.25, 0.5}));
    CHECK(cfg.output_path == "run.csv");
    CHECK(cfg.desired_input.signal(2)(0.0).isApprox(vec({0.0, 0.2}), 1e-15));
  }
}

TEST_CASE("identical configs give identical records") {
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 5;
  cfg.horizon = 0.3;
  const TrajectoryRecord a = run_simulation(cfg, platoon());
  const TrajectoryRecord b = run_simulation(cfg, platoon());
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].state == b.rows[k].state);
    CHECK(a.rows[k].u_applied == b.rows[k].u_applied);
    CHECK(a.rows[k].psi == b.rows[k].psi);
  }
}

TEST_CASE("filter passivity end to end") {
  // constraint-inactive scenario: the asif trajectory coincides with the
  // unfiltered one
  SimulationConfig cfg = SimulationConfig::reference();
  cfg.seed = 8;
  cfg.horizon = 1.0;
  cfg.x0 = 0.05 * Eigen::VectorXd::Ones(5);
  cfg.desired_input.name = "zero";

  cfg.controller_mode = ControllerMode::asif;
  const TrajectoryRecord filtered = run_simulation(cfg, platoon());
  cfg.controller_mode = ControllerMode::desired_only;
  const TrajectoryRecord raw = run_simulation(cfg, platoon());

  REQUIRE(filtered.rows.size() == raw.rows.size());
  for (std::size_t k = 0; k < filtered.rows.size(); ++k) {
    CHECK((filtered.rows[k].state - raw.rows[k].state).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const double passed_fraction =
      static_cast<double>(filtered.count(FilterStatus::passed_desired)) /
      static_cast<double>(filtered.rows.size());
  CHECK(passed_fraction >= 0.95);
}
