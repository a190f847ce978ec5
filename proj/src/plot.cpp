#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "rta/harness.hpp"

namespace rta {

namespace {

struct Axes {
  double x0, y0, w, h;          // pixel rectangle
  double tmin, tmax, vmin, vmax;  // data window

  double px(double t) const { return x0 + (t - tmin) / (tmax - tmin) * w; }
  double py(double v) const { return y0 + h - (v - vmin) / (vmax - vmin) * h; }
};

std::string polyline(const Axes& ax, const std::vector<double>& t, const std::vector<double>& v,
                     const char* color, const char* dash = nullptr, double width = 1.5) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"";
  if (dash) out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << ax.px(t[i]) << ',' << ax.py(v[i]) << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

std::string hline(const Axes& ax, double v, const char* color, const char* dash) {
  std::ostringstream out;
  out << "<line x1=\"" << ax.px(ax.tmin) << "\" y1=\"" << ax.py(v) << "\" x2=\""
      << ax.px(ax.tmax) << "\" y2=\"" << ax.py(v) << "\" stroke=\"" << color
      << "\" stroke-width=\"1\" stroke-dasharray=\"" << dash << "\"/>\n";
  return out.str();
}

std::string frame(const Axes& ax, const char* title, const char* ylabel) {
  std::ostringstream out;
  out << "<rect x=\"" << ax.x0 << "\" y=\"" << ax.y0 << "\" width=\"" << ax.w << "\" height=\""
      << ax.h << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << ax.x0 << "\" y=\"" << ax.y0 - 8 << "\" font-size=\"13\" fill=\"#111\">"
      << title << "</text>\n";
  out << "<text x=\"" << ax.x0 - 38 << "\" y=\"" << ax.y0 + ax.h / 2
      << "\" font-size=\"11\" fill=\"#333\" transform=\"rotate(-90 " << ax.x0 - 38 << ' '
      << ax.y0 + ax.h / 2 << ")\">" << ylabel << "</text>\n";
  // time ticks
  for (int i = 0; i <= 4; ++i) {
    const double t = ax.tmin + (ax.tmax - ax.tmin) * i / 4.0;
    out << "<text x=\"" << ax.px(t) << "\" y=\"" << ax.y0 + ax.h + 14
        << "\" font-size=\"10\" fill=\"#333\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = ax.vmin + (ax.vmax - ax.vmin) * i / 4.0;
    std::ostringstream label;
    label.precision(3);
    label << v;
    out << "<text x=\"" << ax.x0 - 6 << "\" y=\"" << ax.py(v) + 3
        << "\" font-size=\"10\" fill=\"#333\" text-anchor=\"end\">" << label.str() << "</text>\n";
  }
  return out.str();
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void export_plot(const TrajectoryRecord& record, const PlatoonModel& model,
                 const std::filesystem::path& path) {
  if (record.rows.empty()) throw std::invalid_argument("export_plot: empty record");

  const int n = static_cast<int>(record.rows.front().state.size());
  const int nx = record.velocity_dim;
  const int nz = n - nx;
  const int m = static_cast<int>(record.rows.front().u_applied.size());
  const double z_limit = model.config.z_limit;

  std::vector<double> time;
  time.reserve(record.rows.size());
  for (const auto& row : record.rows) time.push_back(row.t);
  const double tmin = time.front();
  const double tmax = std::max(time.back(), tmin + 1e-9);

  std::vector<std::vector<double>> z(nz), u(m), ud(m);
  for (const auto& row : record.rows) {
    for (int j = 0; j < nz; ++j) z[j].push_back(row.state[nx + j]);
    for (int j = 0; j < m; ++j) u[j].push_back(row.u_applied[j]);
    for (int j = 0; j < m; ++j) ud[j].push_back(row.u_desired[j]);
  }

  // S_b cross-section extents per displacement axis: max of z_i over
  // {V <= delta} is sqrt(delta * (P^-1)_ii).
  const Eigen::MatrixXd P_inv = model.P.inverse();
  std::vector<double> sb_extent(nz);
  for (int j = 0; j < nz; ++j) {
    sb_extent[j] = std::sqrt(model.config.delta * P_inv(nx + j, nx + j));
  }

  auto span_of = [](const std::vector<std::vector<double>>& series, double lo, double hi) {
    for (const auto& s : series) {
      for (double v : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const double pad = 0.08 * std::max(hi - lo, 1e-6);
    return std::pair{lo - pad, hi + pad};
  };

  const auto [zlo, zhi] = span_of(z, -z_limit * 1.05, z_limit * 1.05);
  std::vector<std::vector<double>> all_inputs;
  all_inputs.insert(all_inputs.end(), u.begin(), u.end());
  all_inputs.insert(all_inputs.end(), ud.begin(), ud.end());
  const auto [ulo, uhi] = span_of(all_inputs, -0.05, 0.05);

  const double width = 760, height = 620;
  const Axes top{70, 40, width - 110, 240, tmin, tmax, zlo, zhi};
  const Axes bottom{70, 360, width - 110, 210, tmin, tmax, ulo, uhi};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_plot: cannot open " + path.string());

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << frame(top, "displacements", "z");
  out << hline(top, z_limit, "#d62728", "8,4");
  out << hline(top, -z_limit, "#d62728", "8,4");
  for (int j = 0; j < nz; ++j) {
    out << hline(top, sb_extent[j], "#2ca02c", "2,4");
    out << hline(top, -sb_extent[j], "#2ca02c", "2,4");
  }
  for (int j = 0; j < nz; ++j) {
    out << polyline(top, time, z[j], kSeriesColors[j % 6]);
    out << "<text x=\"" << top.x0 + top.w + 6 << "\" y=\"" << top.py(z[j].back())
        << "\" font-size=\"11\" fill=\"" << kSeriesColors[j % 6] << "\">z" << j + 1
        << "</text>\n";
  }
  out << "<text x=\"" << top.x0 + 8 << "\" y=\"" << top.py(z_limit) - 4
      << "\" font-size=\"10\" fill=\"#d62728\">unsafe limit</text>\n";
  out << "<text x=\"" << top.x0 + 8 << "\" y=\"" << top.py(sb_extent[0]) - 4
      << "\" font-size=\"10\" fill=\"#2ca02c\">S_b extent</text>\n";

  out << frame(bottom, "inputs (solid: applied, dashed: desired)", "u");
  for (int j = 0; j < m; ++j) {
    out << polyline(bottom, time, ud[j], kSeriesColors[j % 6], "6,4", 1.0);
    out << polyline(bottom, time, u[j], kSeriesColors[j % 6]);
    out << "<text x=\"" << bottom.x0 + bottom.w + 6 << "\" y=\"" << bottom.py(u[j].back())
        << "\" font-size=\"11\" fill=\"" << kSeriesColors[j % 6] << "\">u" << j + 1
        << "</text>\n";
  }

  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"10\" fill=\"#333\" text-anchor=\"middle\">t (s)</text>\n";
  out << "</svg>\n";
}

}  // namespace rta
