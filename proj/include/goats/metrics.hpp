#pragma once

// Learning-curve rows as CSV, one row per evaluation point.

#include <fstream>
#include <string>
#include <vector>

#include "goats/trainer.hpp"

namespace goats {

inline constexpr const char* kMetricsHeader =
    "episode,env_steps,k,variant,seed,train_reward,eval_reward_mean,eval_reward_se,"
    "amount_error_mean,pos_success_rate,actor_loss,critic_loss,alpha,wall_time_s";

/// Shortest decimal form that parses back to the same double.
std::string format_real(double v);

std::string format_metrics_row(const MetricsRow& row);
MetricsRow parse_metrics_row(const std::string& line);

/// Truncates `path`, writes the header, and appends (and flushes) rows.
class MetricsCsvWriter {
 public:
  explicit MetricsCsvWriter(const std::string& path);
  void append(const MetricsRow& row);

 private:
  std::ofstream out_;
};

/// Throws Error(Io) when the header differs or a numeric cell does not parse
/// as a finite real.
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace goats
