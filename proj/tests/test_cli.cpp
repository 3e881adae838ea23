#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "goats/goats.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = GOATS_CLI_PATH;

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("goats_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch() / ("stdout_" + std::to_string(counter));
  const fs::path err = scratch() / ("stderr_" + std::to_string(counter++));
  const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// A configuration small enough to train in well under a second.
fs::path tiny_config() {
  const fs::path path = scratch() / "tiny.json";
  if (fs::exists(path)) return path;
  const Run r = run("config");
  REQUIRE(r.code == 0);
  auto cfg = nlohmann::json::parse(r.out);
  cfg["sac"]["hidden"] = {16, 16};
  cfg["training"]["total_episodes"] = 4;
  cfg["training"]["warmup_steps"] = 100;
  cfg["training"]["batch_size"] = 32;
  cfg["training"]["eval_every"] = 2;
  cfg["training"]["eval_episodes"] = 2;
  cfg["her"]["capacity"] = 10000;
  std::ofstream(path) << cfg.dump(2);
  return path;
}

double result_field(const std::string& out, const std::string& key) {
  const auto line = out.find("RESULT ");
  REQUIRE(line != std::string::npos);
  const auto pos = out.find(key + "=", line);
  REQUIRE(pos != std::string::npos);
  return std::strtod(out.c_str() + pos + key.size() + 1, nullptr);
}

}  // namespace

TEST_CASE("unknown variant is a usage error that lists the valid names") {
  const Run r = run("train --config " + tiny_config().string() + " --variant ppo --out " +
                    (scratch() / "bad").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("sac_her_pags") != std::string::npos);
  CHECK(r.err.find("goats") != std::string::npos);
}

TEST_CASE("missing or malformed config exits 2") {
  CHECK(run("train --config " + (scratch() / "nope.json").string()).code == 2);
  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{\"training\": {\"total_episodes\": -3}}";
  CHECK(run("train --config " + bad.string() + " --out " + (scratch() / "bad2").string()).code == 2);
  CHECK(run("no-such-command").code == 2);
}

TEST_CASE("training twice gives byte-identical metrics; eval and the C API agree") {
  const fs::path a = scratch() / "run_a", b = scratch() / "run_b", c = scratch() / "run_c";
  REQUIRE(run("train --config " + tiny_config().string() + " --seed 7 --out " + a.string()).code == 0);
  REQUIRE(run("train --config " + tiny_config().string() + " --seed 7 --out " + b.string()).code == 0);
  REQUIRE(run("train --config " + tiny_config().string() + " --seed 8 --out " + c.string()).code == 0);
  const std::string ma = slurp(a / "metrics.csv");
  CHECK(ma.rfind("episode,env_steps,k,variant,seed", 0) == 0);
  CHECK(ma == slurp(b / "metrics.csv"));
  CHECK(ma != slurp(c / "metrics.csv"));
  CHECK(fs::exists(a / "best.ckpt.json"));
  CHECK(fs::exists(a / "final.ckpt.json"));
  // Checkpoints differ only in the recorded output directory.
  auto without_dir = [](const fs::path& p) {
    auto j = nlohmann::json::parse(slurp(p));
    j["config"]["run"].erase("output_dir");
    return j.dump();
  };
  CHECK(without_dir(a / "final.ckpt.json") == without_dir(b / "final.ckpt.json"));

  const fs::path trace = scratch() / "trace.csv";
  const Run e = run("eval --checkpoint " + (a / "best.ckpt.json").string() + " --episodes 1 --seed 5 --trace " +
                    trace.string());
  REQUIRE(e.code == 0);
  CHECK(slurp(trace).rfind("step,x,y,theta,fill_fraction,waterline,reward\n", 0) == 0);

  goats_checkpoint* ckpt = nullptr;
  REQUIRE(goats_checkpoint_load((a / "best.ckpt.json").c_str(), &ckpt) == GOATS_OK);
  goats_eval_report rep{};
  REQUIRE(goats_evaluate(ckpt, 1, 5, nullptr, &rep) == GOATS_OK);
  CHECK(rep.episodes == 1);
  CHECK(result_field(e.out, "mean_reward") == rep.mean_reward);
  CHECK(result_field(e.out, "amount_error_mean") == rep.amount_error_mean);
  goats_checkpoint_free(ckpt);

  // Plotting the populated tree.
  const fs::path svg = scratch() / "curves.svg";
  CHECK(run("plot --runs " + scratch().string() + " --out " + svg.string()).code == 0);
  CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("bad checkpoints exit 2 without printing results") {
  const fs::path src = scratch() / "run_ck";
  REQUIRE(run("train --config " + tiny_config().string() + " --out " + src.string()).code == 0);
  const std::string text = slurp(src / "best.ckpt.json");

  const fs::path truncated = scratch() / "truncated.ckpt.json";
  std::ofstream(truncated) << text.substr(0, text.size() / 2);
  Run r = run("eval --checkpoint " + truncated.string() + " --episodes 1");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(r.err.empty());

  std::string versioned = text;
  const auto pos = versioned.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  versioned.replace(pos, 18, "\"format_version\":2");
  const fs::path future = scratch() / "future.ckpt.json";
  std::ofstream(future) << versioned;
  r = run("eval --checkpoint " + future.string() + " --episodes 1");
  CHECK(r.code == 2);
  CHECK(r.out.empty());

  r = run("eval --checkpoint " + (scratch() / "absent.ckpt.json").string());
  CHECK(r.code == 2);
  CHECK(r.out.empty());
}

TEST_CASE("plot on an empty tree exits 2") {
  const fs::path empty = scratch() / "empty_runs";
  fs::create_directories(empty);
  CHECK(run("plot --runs " + empty.string() + " --out " + (scratch() / "x.svg").string()).code == 2);
}

TEST_CASE("gradcheck passes and its negative control fails") {
  const Run ok = run("gradcheck --batches 2");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  const Run bad = run("gradcheck --batches 2 --corrupt-backward");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("ablation writes one summary row per variant in input order") {
  const fs::path out = scratch() / "ablation";
  const Run r = run("ablate --config " + tiny_config().string() + " --variants goats,sac --seeds 0,1 --out " +
                    out.string());
  REQUIRE(r.code == 0);
  std::istringstream summary(slurp(out / "summary.csv"));
  std::string header, first, second, extra;
  std::getline(summary, header);
  std::getline(summary, first);
  std::getline(summary, second);
  CHECK(header.rfind("variant,runs,failed,", 0) == 0);
  CHECK(first.rfind("goats,2,0,", 0) == 0);
  CHECK(second.rfind("sac,2,0,", 0) == 0);
  CHECK_FALSE(std::getline(summary, extra));
  CHECK(fs::exists(out / "goats_seed1" / "metrics.csv"));

  // Parallel workers give the same grid.
  const fs::path par = scratch() / "ablation_par";
  REQUIRE(run("ablate --config " + tiny_config().string() + " --variants goats,sac --seeds 0,1 --jobs 3 --out " +
              par.string())
              .code == 0);
  CHECK(slurp(par / "summary.csv") == slurp(out / "summary.csv"));
  CHECK(slurp(par / "sac_seed1" / "metrics.csv") == slurp(out / "sac_seed1" / "metrics.csv"));
  CHECK(run("ablate --config " + tiny_config().string() + " --jobs 0 --out " + par.string()).code == 2);
}

TEST_CASE("C API: handles, status codes and messages") {
  CHECK(goats_config_default("bowl", nullptr) == GOATS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(goats_last_error()).size() > 0);

  goats_config* cfg = nullptr;
  CHECK(goats_config_default("teacup", &cfg) == GOATS_ERR_CONFIG);
  CHECK(cfg == nullptr);
  REQUIRE(goats_config_default("bucket", &cfg) == GOATS_OK);
  CHECK(goats_config_set_variant(cfg, "ppo") == GOATS_ERR_CONFIG);
  CHECK(std::string(goats_last_error()).find("sac_her_ugs") != std::string::npos);
  CHECK(goats_config_set_variant(cfg, "sac_pags") == GOATS_OK);
  CHECK(goats_config_set_seed(cfg, 11) == GOATS_OK);
  CHECK(goats_config_set_output_dir(cfg, "somewhere") == GOATS_OK);

  char* text = nullptr;
  REQUIRE(goats_config_to_string(cfg, &text) == GOATS_OK);
  const auto j = nlohmann::json::parse(text);
  CHECK(j["run"]["variant"] == "sac_pags");
  CHECK(j["run"]["seed"] == 11);
  CHECK(j["env"]["container_preset"] == "bucket");

  goats_config* again = nullptr;
  REQUIRE(goats_config_parse(text, &again) == GOATS_OK);
  char* text2 = nullptr;
  REQUIRE(goats_config_to_string(again, &text2) == GOATS_OK);
  CHECK(std::string(text) == std::string(text2));
  char* dir = nullptr;
  REQUIRE(goats_config_get_output_dir(again, &dir) == GOATS_OK);
  CHECK(std::string(dir) == "somewhere");
  goats_string_free(text);
  goats_string_free(text2);
  goats_string_free(dir);
  goats_config_free(again);
  goats_config_free(cfg);
  goats_config_free(nullptr);

  CHECK(goats_config_parse("{\"sac\": {\"gama\": 0.9}}", &cfg) == GOATS_ERR_CONFIG);
  CHECK(goats_config_parse("{not json", &cfg) != GOATS_OK);
  CHECK(goats_checkpoint_load("/nonexistent/x.ckpt.json", nullptr) == GOATS_ERR_INVALID_ARGUMENT);
  goats_checkpoint* ck = nullptr;
  CHECK(goats_checkpoint_load("/nonexistent/x.ckpt.json", &ck) == GOATS_ERR_IO);
  CHECK(goats_evaluate(nullptr, 1, 0, nullptr, nullptr) == GOATS_ERR_INVALID_ARGUMENT);

  CHECK(std::string(goats_variant_names()) == "sac,sac_her,sac_ugs,sac_pags,sac_her_ugs,sac_her_pags,goats");
  CHECK(std::string(goats_status_string(GOATS_ERR_VERSION)).size() > 0);

  goats_gradcheck_options o;
  goats_gradcheck_options_default(&o);
  o.batches = 1;
  goats_gradcheck_report rep{};
  int lines = 0;
  auto count = [](const char*, void* user) { ++*static_cast<int*>(user); };
  CHECK(goats_gradcheck(&o, &rep, count, &lines) == GOATS_OK);
  CHECK(rep.passed == 1);
  CHECK(lines == 4);
  o.corrupt_backward = 1;
  CHECK(goats_gradcheck(&o, &rep, nullptr, nullptr) == GOATS_ERR_CHECK_FAILED);
  CHECK(rep.passed == 0);
}
