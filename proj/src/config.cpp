#include "goats/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "goats/error.hpp"
#include "json_io.hpp"

namespace goats {

namespace detail {

namespace {

// Reads keys from one JSON object and remembers which ones were used, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = doc.at(name_);
      if (!obj_.is_object()) fail(ErrorCode::Config, "section '" + name_ + "' must be an object");
    } else {
      obj_ = json::object();
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, name_ + "." + key + ": " + e.what());
    }
  }

  void read_box(const char* key, BoxDistribution& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const json& b = obj_.at(key);
    if (!b.is_object() || !b.contains("lower") || !b.contains("upper") || b.size() != 2) {
      fail(ErrorCode::Config, name_ + "." + key + " must be {\"lower\": [...], \"upper\": [...]}");
    }
    try {
      out = BoxDistribution(b.at("lower").get<std::vector<double>>(), b.at("upper").get<std::vector<double>>());
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, name_ + "." + key + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::Config, name_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::Config, "unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  std::string name_;
  json obj_;
  std::set<std::string> seen_;
};

json box_json(const BoxDistribution& b) { return {{"lower", b.lower()}, {"upper", b.upper()}}; }

const char* mode_name(InterpolationMode m) {
  return m == InterpolationMode::Mixture ? "mixture" : "displacement";
}

InterpolationMode mode_from(const std::string& s) {
  if (s == "mixture") return InterpolationMode::Mixture;
  if (s == "displacement") return InterpolationMode::Displacement;
  fail(ErrorCode::Config, "goals.interpolation must be 'mixture' or 'displacement'");
}

const char* schedule_name(ScheduleMode m) { return m == ScheduleMode::Linear ? "linear" : "gated"; }

ScheduleMode schedule_from(const std::string& s) {
  if (s == "linear") return ScheduleMode::Linear;
  if (s == "gated") return ScheduleMode::Gated;
  fail(ErrorCode::Config, "curriculum.mode must be 'linear' or 'gated'");
}

}  // namespace

json to_json(const RunConfig& c) {
  json doc;
  doc["run"] = {{"variant", to_string(c.variant)}, {"seed", c.seed}, {"output_dir", c.output_dir}};
  const EnvConfig& e = c.env;
  doc["env"] = {
      {"container_preset", to_string(e.container_preset)},
      {"tank_width", e.tank_width},
      {"tank_wall_height", e.tank_wall_height},
      {"workspace", box_json(e.workspace)},
      {"spawn_position", e.spawn_position},
      {"container_width", e.container_width},
      {"container_capacity", e.container_capacity},
      {"dt", e.dt},
      {"a_max", e.a_max},
      {"alpha_max", e.alpha_max},
      {"v_max", e.v_max},
      {"omega_max", e.omega_max},
      {"theta_max", e.theta_max},
      {"theta_spill", e.theta_spill},
      {"c_in", e.c_in},
      {"c_out", e.c_out},
      {"episode_len", e.episode_len},
      {"waterline_range", e.waterline_range},
      {"waterline_obs_noise_sigma", e.waterline_obs_noise_sigma},
  };
  const SacConfig& s = c.sac;
  doc["sac"] = {{"hidden", s.hidden},
                {"actor_lr", s.actor_lr},
                {"critic_lr", s.critic_lr},
                {"alpha_lr", s.alpha_lr},
                {"gamma", s.gamma},
                {"tau", s.tau},
                {"target_entropy", s.target_entropy},
                {"init_log_alpha", s.init_log_alpha},
                {"final_layer_scale", s.final_layer_scale}};
  doc["her"] = {{"capacity", c.her.capacity}, {"k_her", c.her.k_her}, {"append_achieved", c.her.append_achieved}};
  const CurriculumSchedule& cs = c.curriculum;
  doc["curriculum"] = {{"mode", schedule_name(cs.mode)},
                       {"ramp_fraction", cs.ramp_fraction},
                       {"delta_k", cs.delta_k},
                       {"success_threshold", cs.success_threshold},
                       {"window", cs.window},
                       {"success_amount_tolerance", cs.success_amount_tolerance}};
  const GoalConfig& g = c.goals;
  doc["goals"] = {{"initial_position", box_json(g.initial_position)},
                  {"desired_position", box_json(g.desired_position)},
                  {"universal_position", box_json(g.universal_position)},
                  {"desired_amounts", g.desired_amounts},
                  {"zero_amount_weight", g.zero_amount_weight},
                  {"interpolation", mode_name(g.interpolation)}};
  const TrainingConfig& t = c.training;
  doc["training"] = {{"total_episodes", t.total_episodes},
                     {"warmup_steps", t.warmup_steps},
                     {"batch_size", t.batch_size},
                     {"update_every", t.update_every},
                     {"updates_per_round", t.updates_per_round},
                     {"eval_every", t.eval_every},
                     {"eval_episodes", t.eval_episodes},
                     {"epsilon", t.epsilon},
                     {"checkpoint_every", t.checkpoint_every},
                     {"record_wall_time", t.record_wall_time}};
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::Config, "configuration must be a JSON object");
  static const std::set<std::string> sections{"run", "env", "sac", "her", "curriculum", "goals", "training"};
  for (const auto& [key, value] : doc.items()) {
    if (!sections.count(key)) fail(ErrorCode::Config, "unknown section '" + key + "'");
  }

  Section env(doc, "env");
  std::string preset_name = "bowl";
  env.read("container_preset", preset_name);
  RunConfig c = default_run_config(container_preset_from_string(preset_name));

  Section run(doc, "run");
  std::string variant = to_string(c.variant);
  run.read("variant", variant);
  c.variant = variant_from_string(variant);
  run.read("seed", c.seed);
  run.read("output_dir", c.output_dir);
  run.finish();

  EnvConfig& e = c.env;
  env.read("tank_width", e.tank_width);
  env.read("tank_wall_height", e.tank_wall_height);
  env.read_box("workspace", e.workspace);
  env.read("spawn_position", e.spawn_position);
  env.read("container_width", e.container_width);
  env.read("container_capacity", e.container_capacity);
  env.read("dt", e.dt);
  env.read("a_max", e.a_max);
  env.read("alpha_max", e.alpha_max);
  env.read("v_max", e.v_max);
  env.read("omega_max", e.omega_max);
  env.read("theta_max", e.theta_max);
  env.read("theta_spill", e.theta_spill);
  env.read("c_in", e.c_in);
  env.read("c_out", e.c_out);
  env.read("episode_len", e.episode_len);
  env.read("waterline_range", e.waterline_range);
  env.read("waterline_obs_noise_sigma", e.waterline_obs_noise_sigma);
  env.finish();

  Section sac(doc, "sac");
  SacConfig& s = c.sac;
  sac.read("hidden", s.hidden);
  sac.read("actor_lr", s.actor_lr);
  sac.read("critic_lr", s.critic_lr);
  sac.read("alpha_lr", s.alpha_lr);
  sac.read("gamma", s.gamma);
  sac.read("tau", s.tau);
  sac.read("target_entropy", s.target_entropy);
  sac.read("init_log_alpha", s.init_log_alpha);
  sac.read("final_layer_scale", s.final_layer_scale);
  sac.finish();

  Section her(doc, "her");
  her.read("capacity", c.her.capacity);
  her.read("k_her", c.her.k_her);
  her.read("append_achieved", c.her.append_achieved);
  her.finish();

  Section cur(doc, "curriculum");
  std::string mode = schedule_name(c.curriculum.mode);
  cur.read("mode", mode);
  c.curriculum.mode = schedule_from(mode);
  cur.read("ramp_fraction", c.curriculum.ramp_fraction);
  cur.read("delta_k", c.curriculum.delta_k);
  cur.read("success_threshold", c.curriculum.success_threshold);
  cur.read("window", c.curriculum.window);
  cur.read("success_amount_tolerance", c.curriculum.success_amount_tolerance);
  cur.finish();

  Section goals(doc, "goals");
  GoalConfig& g = c.goals;
  goals.read_box("initial_position", g.initial_position);
  goals.read_box("desired_position", g.desired_position);
  goals.read_box("universal_position", g.universal_position);
  goals.read("desired_amounts", g.desired_amounts);
  goals.read("zero_amount_weight", g.zero_amount_weight);
  std::string interp = mode_name(g.interpolation);
  goals.read("interpolation", interp);
  g.interpolation = mode_from(interp);
  goals.finish();

  Section tr(doc, "training");
  TrainingConfig& t = c.training;
  tr.read("total_episodes", t.total_episodes);
  tr.read("warmup_steps", t.warmup_steps);
  tr.read("batch_size", t.batch_size);
  tr.read("update_every", t.update_every);
  tr.read("updates_per_round", t.updates_per_round);
  tr.read("eval_every", t.eval_every);
  tr.read("eval_episodes", t.eval_episodes);
  tr.read("epsilon", t.epsilon);
  tr.read("checkpoint_every", t.checkpoint_every);
  tr.read("record_wall_time", t.record_wall_time);
  tr.finish();

  try {
    c.validate();
  } catch (const Error& err) {
    fail(ErrorCode::Config, err.what());
  }
  return c;
}

}  // namespace detail

RunConfig default_run_config(ContainerPreset preset) {
  RunConfig c;
  c.env = EnvConfig::preset(preset);
  c.goals = GoalConfig::preset(preset);
  return c;
}

RunConfig run_config_from_string(const std::string& text) {
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    fail(ErrorCode::Config, std::string("configuration is not valid JSON: ") + e.what());
  }
  return detail::run_config_from_json(doc);
}

std::string run_config_to_string(const RunConfig& config) { return detail::to_json(config).dump(2) + "\n"; }

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open configuration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_string(ss.str());
}

void save_run_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write configuration file " + path);
  out << run_config_to_string(config);
}

}  // namespace goats
