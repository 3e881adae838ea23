#include "goats/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "goats/error.hpp"
#include "json_io.hpp"

namespace goats {

namespace detail {

json to_json(const Mlp& net) {
  json shapes = json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    shapes.push_back({net.layer_sizes()[l + 1], net.layer_sizes()[l]});
  }
  const auto p = net.params();
  return {{"shapes", shapes}, {"params", std::vector<double>(p.begin(), p.end())}};
}

Mlp mlp_from_json(const json& doc) {
  const auto shapes = doc.at("shapes").get<std::vector<std::array<int, 2>>>();
  if (shapes.empty()) fail(ErrorCode::Io, "network has no layers");
  std::vector<int> sizes{shapes.front()[1]};
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (shapes[l][1] != sizes.back()) fail(ErrorCode::Io, "network layer shapes do not chain");
    sizes.push_back(shapes[l][0]);
  }
  Mlp net(sizes);
  const auto params = doc.at("params").get<std::vector<double>>();
  if (params.size() != net.num_params()) fail(ErrorCode::Io, "network parameter count mismatch");
  std::copy(params.begin(), params.end(), net.params().begin());
  return net;
}

json to_json(const AdamState& s) {
  return {{"t", s.t}, {"lr", s.lr}, {"beta1", s.beta1}, {"beta2", s.beta2},
          {"eps", s.eps}, {"m", s.m}, {"v", s.v}};
}

AdamState adam_from_json(const json& doc) {
  AdamState s;
  s.t = doc.at("t").get<long>();
  s.lr = doc.at("lr").get<double>();
  s.beta1 = doc.at("beta1").get<double>();
  s.beta2 = doc.at("beta2").get<double>();
  s.eps = doc.at("eps").get<double>();
  s.m = doc.at("m").get<std::vector<double>>();
  s.v = doc.at("v").get<std::vector<double>>();
  return s;
}

}  // namespace detail

using detail::json;

std::string checkpoint_to_string(const Checkpoint& c) {
  const SacAgent& a = c.agent;
  json doc;
  doc["format_version"] = c.format_version;
  doc["config"] = detail::to_json(c.config);
  doc["episode"] = c.episode;
  doc["env_steps"] = c.env_steps;
  doc["seed"] = c.seed;
  doc["dims"] = {{"input", a.input_dim()}, {"action", a.action_dim()}};
  doc["networks"] = {{"actor", detail::to_json(a.actor.net())},
                     {"q1", detail::to_json(a.q1)},
                     {"q2", detail::to_json(a.q2)},
                     {"q1_target", detail::to_json(a.q1_target)},
                     {"q2_target", detail::to_json(a.q2_target)}};
  doc["optimizers"] = {{"actor", detail::to_json(a.actor_opt)},
                       {"q1", detail::to_json(a.q1_opt)},
                       {"q2", detail::to_json(a.q2_opt)},
                       {"log_alpha", detail::to_json(a.alpha_opt)}};
  doc["log_alpha"] = a.log_alpha;
  doc["normalizer"] = {{"offset", a.normalizer.offset}, {"scale", a.normalizer.scale}};
  return doc.dump() + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) {
    fail(ErrorCode::Io, "checkpoint has no format_version");
  }
  Checkpoint c;
  try {
    c.format_version = doc.at("format_version").get<int>();
    if (c.format_version != kCheckpointVersion) {
      fail(ErrorCode::Version, "checkpoint format version " + std::to_string(c.format_version) +
                                   " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    c.config = detail::run_config_from_json(doc.at("config"));
    c.episode = doc.at("episode").get<int>();
    c.env_steps = doc.at("env_steps").get<long>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    const int input = doc.at("dims").at("input").get<int>();
    const int action = doc.at("dims").at("action").get<int>();

    Rng scratch(0);
    SacAgent agent(input, action, c.config.sac, scratch);
    const json& nets = doc.at("networks");
    auto load_net = [&](const char* name, Mlp& dst) {
      Mlp net = detail::mlp_from_json(nets.at(name));
      if (net.layer_sizes() != dst.layer_sizes()) {
        fail(ErrorCode::Io, std::string("network '") + name + "' does not match the configured architecture");
      }
      dst = std::move(net);
    };
    load_net("actor", agent.actor.net());
    load_net("q1", agent.q1);
    load_net("q2", agent.q2);
    load_net("q1_target", agent.q1_target);
    load_net("q2_target", agent.q2_target);

    const json& opts = doc.at("optimizers");
    auto load_opt = [&](const char* name, AdamState& dst) {
      AdamState s = detail::adam_from_json(opts.at(name));
      if (s.m.size() != dst.m.size() || s.v.size() != dst.v.size()) {
        fail(ErrorCode::Io, std::string("optimizer '") + name + "' has the wrong size");
      }
      dst = std::move(s);
    };
    load_opt("actor", agent.actor_opt);
    load_opt("q1", agent.q1_opt);
    load_opt("q2", agent.q2_opt);
    load_opt("log_alpha", agent.alpha_opt);

    agent.log_alpha = doc.at("log_alpha").get<double>();
    agent.normalizer.offset = doc.at("normalizer").at("offset").get<std::vector<double>>();
    agent.normalizer.scale = doc.at("normalizer").at("scale").get<std::vector<double>>();
    if (agent.normalizer.offset.size() != static_cast<std::size_t>(input) ||
        agent.normalizer.scale.size() != static_cast<std::size_t>(input)) {
      fail(ErrorCode::Io, "normalizer has the wrong size");
    }
    c.agent = std::move(agent);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Version || e.code() == ErrorCode::Io) throw;
    fail(ErrorCode::Io, std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  // Write-then-rename so readers never see a half-written file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + path);
    out << checkpoint_to_string(ckpt);
    if (!out) fail(ErrorCode::Io, "failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace goats
