#include "rta/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace rta {

const char* to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::desired_only: return "desired-only";
    case ControllerMode::vanilla_cbf: return "vanilla-cbf";
    case ControllerMode::asif: return "asif";
    case ControllerMode::backup_only: return "backup-only";
  }
  return "?";
}

ControllerMode mode_from_string(const std::string& name) {
  if (name == "desired-only") return ControllerMode::desired_only;
  if (name == "vanilla-cbf") return ControllerMode::vanilla_cbf;
  if (name == "asif") return ControllerMode::asif;
  if (name == "backup-only") return ControllerMode::backup_only;
  throw ConfigError("unknown controller_mode '" + name + "'");
}

std::function<Eigen::VectorXd(double)> DesiredInputSpec::signal(int m) const {
  if (name == "zero") {
    return [m](double) { return Eigen::VectorXd::Zero(m).eval(); };
  }
  if (name == "constant") {
    if (value.size() != m) {
      throw ConfigError("desired_input 'constant' needs a value of input dimension");
    }
    Eigen::VectorXd v = value;
    return [v](double) { return v; };
  }
  if (name == "reference") {
    if (m != 2) throw ConfigError("desired_input 'reference' is a two-channel signal");
    return [](double t) {
      Eigen::VectorXd u(2);
      u << -0.3 * std::sin(std::numbers::pi * t / 4.0), 0.2 * std::cos(std::numbers::pi * t / 2.0);
      return u;
    };
  }
  throw ConfigError("unknown desired_input name '" + name + "'");
}

SimulationConfig SimulationConfig::reference() {
  SimulationConfig cfg;
  cfg.platoon = PlatoonConfig::defaults();
  cfg.x0.resize(5);
  cfg.x0 << -0.25, 0.0, 0.5, 0.25, 0.5;
  cfg.desired_input.name = "reference";
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON ingestion (fail-closed: unknown keys are errors)
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

Eigen::VectorXd vector_from(const json& arr, const char* where) {
  if (!arr.is_array()) throw ConfigError(std::string(where) + " must be an array");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(std::string(where) + " must be numeric");
    v[i] = arr[i].get<double>();
  }
  return v;
}

PlatoonConfig platoon_from(const json& obj) {
  require_keys(obj, "platoon",
               {"N", "A", "beta", "kappa", "sigma", "delta", "W", "p", "T_b", "z_limit"});
  PlatoonConfig cfg = PlatoonConfig::defaults();
  if (obj.contains("N")) cfg.N = obj["N"].get<int>();
  if (obj.contains("A")) {
    const auto& rows = obj["A"];
    if (!rows.is_array() || rows.empty()) throw ConfigError("platoon.A must be a matrix");
    const auto cols = rows[0].size();
    cfg.A.resize(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) throw ConfigError("platoon.A rows have unequal length");
      for (std::size_t j = 0; j < cols; ++j) cfg.A(i, j) = rows[i][j].get<double>();
    }
  }
  if (obj.contains("beta")) cfg.beta = obj["beta"].get<double>();
  if (obj.contains("kappa")) cfg.kappa = obj["kappa"].get<double>();
  if (obj.contains("sigma")) cfg.sigma = obj["sigma"].get<double>();
  if (obj.contains("delta")) cfg.delta = obj["delta"].get<double>();
  if (obj.contains("W")) {
    require_keys(obj["W"], "platoon.W", {"lower", "upper"});
    cfg.W = IntervalVector(vector_from(obj["W"]["lower"], "platoon.W.lower"),
                           vector_from(obj["W"]["upper"], "platoon.W.upper"));
  }
  if (obj.contains("p")) cfg.p = obj["p"].get<double>();
  if (obj.contains("T_b")) cfg.T_b = obj["T_b"].get<double>();
  if (obj.contains("z_limit")) cfg.z_limit = obj["z_limit"].get<double>();
  return cfg;
}

}  // namespace

SimulationConfig SimulationConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  require_keys(root, "config",
               {"platoon", "horizon", "dt", "controller_mode", "seed", "x0", "desired_input",
                "dt_embed", "output_path"});

  SimulationConfig cfg = SimulationConfig::reference();
  try {
    if (root.contains("platoon")) cfg.platoon = platoon_from(root["platoon"]);
    if (root.contains("horizon")) cfg.horizon = root["horizon"].get<double>();
    if (root.contains("dt")) cfg.dt = root["dt"].get<double>();
    if (root.contains("controller_mode")) {
      cfg.controller_mode = mode_from_string(root["controller_mode"].get<std::string>());
    }
    if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("x0")) cfg.x0 = vector_from(root["x0"], "x0");
    if (root.contains("desired_input")) {
      require_keys(root["desired_input"], "desired_input", {"name", "value"});
      cfg.desired_input.name = root["desired_input"].value("name", "zero");
      if (root["desired_input"].contains("value")) {
        cfg.desired_input.value = vector_from(root["desired_input"]["value"],
                                              "desired_input.value");
      }
    }
    if (root.contains("dt_embed")) cfg.dt_embed = root["dt_embed"].get<double>();
    if (root.contains("output_path")) cfg.output_path = root["output_path"].get<std::string>();
  } catch (const json::exception& err) {
    throw ConfigError(std::string("config field error: ") + err.what());
  }

  if (!(cfg.dt > 0.0) || cfg.horizon < 0.0 || !(cfg.dt_embed > 0.0)) {
    throw ConfigError("config: dt > 0, horizon >= 0, dt_embed > 0 required");
  }
  try {
    cfg.platoon.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config platoon block invalid: ") + err.what());
  }
  if (cfg.x0.size() != cfg.platoon.state_dim()) {
    throw ConfigError("config: x0 dimension does not match the platoon state dimension");
  }
  return cfg;
}

SimulationConfig SimulationConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Simulation loop
// ---------------------------------------------------------------------------

double TrajectoryRecord::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) m = std::min(m, row.h);
  return m;
}

double TrajectoryRecord::max_abs_z() const {
  double m = 0.0;
  for (const auto& row : rows) {
    m = std::max(m, row.state.tail(row.state.size() - velocity_dim).cwiseAbs().maxCoeff());
  }
  return m;
}

long TrajectoryRecord::count(FilterStatus status) const {
  return std::count_if(rows.begin(), rows.end(),
                       [status](const Row& r) { return r.status == status; });
}

DisturbanceSignal disturbance_signal(std::uint64_t seed, const IntervalVector& W, double horizon,
                                     double segment) {
  return DisturbanceSignal::piecewise_linear(seed, W, horizon, segment);
}

TrajectoryRecord run_simulation(const SimulationConfig& cfg) {
  return run_simulation(cfg, build_platoon(cfg.platoon));
}

TrajectoryRecord run_simulation(const SimulationConfig& cfg, const PlatoonModel& model) {
  const auto desired = cfg.desired_input.signal(model.system.m);
  const auto w_signal = disturbance_signal(cfg.seed, model.config.W, cfg.horizon);
  AsifParams asif_params;
  asif_params.psi.p = model.config.p;
  asif_params.psi.dt_embed = cfg.dt_embed;

  TrajectoryRecord record;
  record.velocity_dim = model.config.N;
  const long steps = static_cast<long>(std::floor(cfg.horizon / cfg.dt + 1e-9));
  record.rows.reserve(steps + 1);

  Eigen::VectorXd state = cfg.x0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    if (!state.allFinite()) {
      record.error_flag = true;
      break;
    }

    TrajectoryRecord::Row row;
    row.t = t;
    row.state = state;
    row.u_desired = desired(t);
    row.w = w_signal(t);
    row.h = model.policy.h.h(state);

    switch (cfg.controller_mode) {
      case ControllerMode::desired_only:
        row.u_applied = row.u_desired;
        row.status = FilterStatus::raw;
        break;
      case ControllerMode::backup_only:
        row.u_applied = model.policy.u_b(state);
        row.status = FilterStatus::backup_fallback;
        break;
      case ControllerMode::vanilla_cbf: {
        const FilterDecision decision = vanilla_cbf_step(
            state, row.u_desired, model.policy.h, model.policy.alpha, model.system,
            model.policy.u_b);
        row.u_applied = decision.u;
        row.status = decision.status;
        break;
      }
      case ControllerMode::asif: {
        const FilterDecision decision = asif_step(state, row.u_desired, model.policy,
                                                  model.system, model.decomposition, asif_params);
        row.u_applied = decision.u;
        row.status = decision.status;
        row.psi = decision.psi;
        break;
      }
    }

    for (const auto& [idx, threshold] : model.unsafe.abs_thresholds) {
      if (std::abs(state[idx]) >= threshold) record.unsafe_flag = true;
    }

    record.rows.push_back(row);
    if (k < steps) {
      // Euler step of the closed loop, matching the reference study
      state = state + cfg.dt * eval_system(model.system, state, row.u_applied, row.w);
    }
  }
  return record;
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

namespace {

std::string format9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

FilterStatus status_from_token(const std::string& token) {
  if (token == "passed-desired") return FilterStatus::passed_desired;
  if (token == "projected") return FilterStatus::projected;
  if (token == "backup-fallback") return FilterStatus::backup_fallback;
  if (token == "raw") return FilterStatus::raw;
  throw std::invalid_argument("unknown filter status token '" + token + "'");
}

}  // namespace

void export_csv(const TrajectoryRecord& record, const std::filesystem::path& path) {
  if (record.rows.empty()) throw std::invalid_argument("export_csv: empty record");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path.string());

  const auto& first = record.rows.front();
  const int n = static_cast<int>(first.state.size());
  const int nx = record.velocity_dim;
  const int m = static_cast<int>(first.u_applied.size());
  const int nw = static_cast<int>(first.w.size());

  out << "t";
  for (int i = 0; i < nx; ++i) out << ",x" << i + 1;
  for (int i = 0; i < n - nx; ++i) out << ",z" << i + 1;
  for (int i = 0; i < m; ++i) out << ",u" << i + 1;
  for (int i = 0; i < m; ++i) out << ",ud" << i + 1;
  for (int i = 0; i < nw; ++i) out << ",w" << i + 1;
  out << ",psi,h,status\n";

  for (const auto& row : record.rows) {
    out << format9(row.t);
    for (int i = 0; i < n; ++i) out << ',' << format9(row.state[i]);
    for (int i = 0; i < m; ++i) out << ',' << format9(row.u_applied[i]);
    for (int i = 0; i < m; ++i) out << ',' << format9(row.u_desired[i]);
    for (int i = 0; i < nw; ++i) out << ',' << format9(row.w[i]);
    out << ',' << format9(row.psi) << ',' << format9(row.h) << ',' << to_string(row.status)
        << '\n';
  }
}

TrajectoryRecord import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path.string());

  std::string header;
  std::getline(in, header);
  std::vector<std::string> columns;
  {
    std::stringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) columns.push_back(col);
  }
  int nx = 0, nz = 0, m = 0, nw = 0;
  for (const auto& col : columns) {
    if (col.rfind("x", 0) == 0 && col != "x") ++nx;
    else if (col.rfind("z", 0) == 0) ++nz;
    else if (col.rfind("ud", 0) == 0) ++m;
    else if (col.rfind("w", 0) == 0) ++nw;
  }

  TrajectoryRecord record;
  record.velocity_dim = nx;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns.size()) {
      throw std::runtime_error("import_csv: ragged row in " + path.string());
    }
    TrajectoryRecord::Row row;
    std::size_t c = 0;
    row.t = std::stod(cells[c++]);
    row.state.resize(nx + nz);
    for (int i = 0; i < nx + nz; ++i) row.state[i] = std::stod(cells[c++]);
    row.u_applied.resize(m);
    for (int i = 0; i < m; ++i) row.u_applied[i] = std::stod(cells[c++]);
    row.u_desired.resize(m);
    for (int i = 0; i < m; ++i) row.u_desired[i] = std::stod(cells[c++]);
    row.w.resize(nw);
    for (int i = 0; i < nw; ++i) row.w[i] = std::stod(cells[c++]);
    row.psi = std::stod(cells[c++]);
    row.h = std::stod(cells[c++]);
    row.status = status_from_token(cells[c++]);
    record.rows.push_back(std::move(row));
  }
  return record;
}

}  // namespace rta
