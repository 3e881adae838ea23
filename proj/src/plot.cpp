#include "goats/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "goats/error.hpp"
#include "goats/metrics.hpp"

namespace goats {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::vector<CurveSeries> aggregate_curves(const std::vector<std::vector<MetricsRow>>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const std::vector<MetricsRow>*>> groups;
  for (const auto& run : runs) {
    if (run.empty()) continue;
    const std::string& v = run.front().variant;
    if (!groups.count(v)) order.push_back(v);
    groups[v].push_back(&run);
  }

  std::vector<CurveSeries> out;
  for (const auto& name : order) {
    const auto& members = groups[name];
    std::map<int, std::vector<double>> by_episode;
    for (const auto* run : members) {
      for (const auto& row : *run) by_episode[row.episode].push_back(row.eval_reward_mean);
    }
    CurveSeries s;
    s.name = name;
    s.runs = static_cast<int>(members.size());
    for (const auto& [ep, values] : by_episode) {
      if (values.size() != members.size()) continue;
      const double n = static_cast<double>(values.size());
      double m = 0.0;
      for (double v : values) m += v;
      m /= n;
      double se = 0.0;
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
      s.episode.push_back(ep);
      s.mean.push_back(m);
      s.se.push_back(se);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_learning_curve_svg(const std::vector<CurveSeries>& series, std::ostream& out) {
  const double width = 720, height = 440;
  const double left = 70, right = 170, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 0.0;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.episode.size(); ++i) {
      if (!any) {
        x_min = x_max = s.episode[i];
        y_min = s.mean[i] - s.se[i];
        y_max = s.mean[i] + s.se[i];
        any = true;
      }
      x_min = std::min(x_min, s.episode[i]);
      x_max = std::max(x_max, s.episode[i]);
      y_min = std::min(y_min, s.mean[i] - s.se[i]);
      y_max = std::max(y_max, s.mean[i] + s.se[i]);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << std::round(xv)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">episode</text>\n";
  os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << top + ph / 2 << ")\">evaluation reward</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const bool band = std::any_of(s.se.begin(), s.se.end(), [](double v) { return v > 0.0; });
    if (band && !s.episode.empty()) {
      os << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.episode.size(); ++i) os << px(s.episode[i]) << ',' << py(s.mean[i] + s.se[i]) << ' ';
      for (std::size_t i = s.episode.size(); i-- > 0;) os << px(s.episode[i]) << ',' << py(s.mean[i] - s.se[i]) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline class=\"series\" data-name=\"" << s.name << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.episode.size(); ++i) os << px(s.episode[i]) << ',' << py(s.mean[i]) << ' ';
    os << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << s.name << " (n=" << s.runs << ")</text>\n";
  }
  os << "</svg>\n";
  out << os.str();
}

void plot_runs(const std::string& runs_dir, const std::string& out_file) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(runs_dir)) fail(ErrorCode::Io, "runs directory " + runs_dir + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") files.push_back(entry.path());
  }
  if (files.empty()) fail(ErrorCode::Io, "no metrics.csv files found under " + runs_dir);
  std::sort(files.begin(), files.end());
  std::vector<std::vector<MetricsRow>> runs;
  for (const auto& f : files) runs.push_back(read_metrics_csv(f.string()));
  const auto series = aggregate_curves(runs);
  std::ofstream out(out_file);
  if (!out) fail(ErrorCode::Io, "cannot write plot " + out_file);
  write_learning_curve_svg(series, out);
}

}  // namespace goats
