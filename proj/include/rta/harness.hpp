#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rta/asif.hpp"
#include "rta/platoon.hpp"
#include "rta/signal.hpp"

namespace rta {

enum class ControllerMode { desired_only, vanilla_cbf, asif, backup_only };

const char* to_string(ControllerMode mode);
ControllerMode mode_from_string(const std::string& name);

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Named open-loop desired-input signal. "zero" and "constant" are generic;
// "reference" is the bundled two-channel sin/cos excitation
// u(t) = (-0.3 sin(pi t / 4), 0.2 cos(pi t / 2)).
struct DesiredInputSpec {
  std::string name{"zero"};
  Eigen::VectorXd value;  // constant signal payload

  std::function<Eigen::VectorXd(double)> signal(int m) const;
};

struct SimulationConfig {
  PlatoonConfig platoon{PlatoonConfig::defaults()};
  double horizon{4.0};
  double dt{0.01};
  ControllerMode controller_mode{ControllerMode::asif};
  std::uint64_t seed{0};
  Eigen::VectorXd x0;
  DesiredInputSpec desired_input;
  double dt_embed{0.01};
  std::string output_path;

  // The bundled 3-cart study: horizon 4 s, dt 0.01, x0 velocities
  // (-1/4, 0, 1/2) and displacements (1/4, 1/2), reference desired input.
  static SimulationConfig reference();

  // Strict config ingestion: unknown keys at any nesting level are errors.
  static SimulationConfig from_json_file(const std::filesystem::path& path);
  static SimulationConfig from_json_text(const std::string& text);
};

struct TrajectoryRecord {
  struct Row {
    double t{0.0};
    Eigen::VectorXd state, u_applied, u_desired, w;
    double psi{std::numeric_limits<double>::quiet_NaN()};
    double h{std::numeric_limits<double>::quiet_NaN()};
    FilterStatus status{FilterStatus::raw};
  };
  std::vector<Row> rows;
  bool unsafe_flag{false};
  bool error_flag{false};
  int velocity_dim{0};  // header split between x... and z... columns

  double min_h() const;
  double max_abs_z() const;
  long count(FilterStatus status) const;
};

// Piecewise-linear Lipschitz disturbance realization (re-exported from the
// signal layer; the harness owns the default knot spacing).
DisturbanceSignal disturbance_signal(std::uint64_t seed, const IntervalVector& W, double horizon,
                                     double segment = 0.25);

TrajectoryRecord run_simulation(const SimulationConfig& cfg);
// Variant reusing an already-built model (the config's platoon block must
// be the one the model was built from).
TrajectoryRecord run_simulation(const SimulationConfig& cfg, const PlatoonModel& model);

void export_csv(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord import_csv(const std::filesystem::path& path);

// Self-contained SVG with two panels: displacements with the unsafe limits
// and the S_b cross-section extents, and applied vs desired inputs.
void export_plot(const TrajectoryRecord& record, const PlatoonModel& model,
                 const std::filesystem::path& path);

}  // namespace rta
