#include "goats/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "goats/error.hpp"

namespace goats {

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorCode::Io, "cannot format number");
  return {buf, end};
}

std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.episode << ',' << r.env_steps << ',' << format_real(r.k) << ',' << r.variant << ',' << r.seed << ','
     << format_real(r.train_reward) << ',' << format_real(r.eval_reward_mean) << ','
     << format_real(r.eval_reward_se) << ',' << format_real(r.amount_error_mean) << ','
     << format_real(r.pos_success_rate) << ',' << format_real(r.actor_loss) << ','
     << format_real(r.critic_loss) << ',' << format_real(r.alpha) << ',' << format_real(r.wall_time_s);
  return os.str();
}

namespace {

double parse_real(const std::string& cell) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    fail(ErrorCode::Io, "metrics cell '" + cell + "' is not a finite real");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& cell) {
  Int v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    fail(ErrorCode::Io, "metrics cell '" + cell + "' is not an integer");
  }
  return v;
}

}  // namespace

MetricsRow parse_metrics_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (cells.size() != 14) fail(ErrorCode::Io, "metrics row must have 14 cells: " + line);
  MetricsRow r;
  r.episode = parse_int<int>(cells[0]);
  r.env_steps = parse_int<long>(cells[1]);
  r.k = parse_real(cells[2]);
  r.variant = cells[3];
  r.seed = parse_int<std::uint64_t>(cells[4]);
  r.train_reward = parse_real(cells[5]);
  r.eval_reward_mean = parse_real(cells[6]);
  r.eval_reward_se = parse_real(cells[7]);
  r.amount_error_mean = parse_real(cells[8]);
  r.pos_success_rate = parse_real(cells[9]);
  r.actor_loss = parse_real(cells[10]);
  r.critic_loss = parse_real(cells[11]);
  r.alpha = parse_real(cells[12]);
  r.wall_time_s = parse_real(cells[13]);
  return r;
}

MetricsCsvWriter::MetricsCsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) fail(ErrorCode::Io, "cannot write metrics file " + path);
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsCsvWriter::append(const MetricsRow& row) {
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open metrics file " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    fail(ErrorCode::Io, "metrics file " + path + " has an unexpected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

}  // namespace goats
