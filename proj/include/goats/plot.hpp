#pragma once

// SVG learning curves: evaluation reward against episode, one line per
// variant with a mean +/- standard-error band across seeds.

#include <iosfwd>
#include <string>
#include <vector>

#include "goats/trainer.hpp"

namespace goats {

struct CurveSeries {
  std::string name;
  int runs = 0;
  std::vector<double> episode;
  std::vector<double> mean;
  std::vector<double> se;  // zero for single-run series
};

/// Groups runs by variant (first-seen order) and averages episodes that
/// every run of the variant reported.
std::vector<CurveSeries> aggregate_curves(const std::vector<std::vector<MetricsRow>>& runs);

void write_learning_curve_svg(const std::vector<CurveSeries>& series, std::ostream& out);

/// Finds every metrics.csv below `runs_dir`, aggregates, and writes the SVG.
/// Throws Error(Io) when no metrics files are found.
void plot_runs(const std::string& runs_dir, const std::string& out_file);

}  // namespace goats
