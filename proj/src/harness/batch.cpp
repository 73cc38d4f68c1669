#include "ebd/harness/batch.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ebd/error.hpp"
#include "ebd/llm_client.hpp"
#include "ebd/remote_reward.hpp"
#include "ebd/toy_lm.hpp"

namespace ebd::harness {

namespace fs = std::filesystem;

void OrderedSink::submit(std::size_t index, RunRecord record) {
  std::lock_guard lock(mutex_);
  pending_.emplace(index, std::move(record));
  for (auto it = pending_.find(next_); it != pending_.end(); it = pending_.find(next_)) {
    write_(it->second);
    pending_.erase(it);
    ++next_;
  }
}

void RunConfig::validate() const {
  decode.validate();
  if (method == Method::best_of_n && best_of_n < 1) {
    throw InputDomainError("best_of_n requires n >= 1");
  }
  if (parallelism < 1) throw InputDomainError("parallelism must be >= 1");
  auto require_file = [](const fs::path& p, const char* what) {
    if (p.empty()) throw InputDomainError(std::string(what) + " path is not set");
    if (!fs::is_regular_file(p)) {
      throw InputDomainError(std::string(what) + " file not found: " + p.string());
    }
  };
  require_file(prompts_path, "prompts");
  if (backend == BackendKind::toy) {
    require_file(model_path, "model");
    if (reward_endpoint) {
      throw InputDomainError("remote reward endpoints score text; use the remote backend");
    }
  } else if (!generator_endpoint) {
    throw InputDomainError("remote backend needs an endpoint");
  }
  if (!reward_endpoint) require_file(reward_path, "reward");
  if (out_path.empty()) throw InputDomainError("output path is not set");
  const auto parent = out_path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw InputDomainError("output directory does not exist: " + parent.string());
  }
}

bool RunConfig::record_latency() const {
  switch (latency) {
    case LatencyMode::on:
      return true;
    case LatencyMode::off:
      return false;
    case LatencyMode::automatic:
      return backend == BackendKind::remote;
  }
  return false;
}

namespace {

EndpointConfig parse_endpoint(const nlohmann::json& j, const fs::path& base_dir) {
  EndpointConfig e;
  e.base_url = j.at("base_url").get<std::string>();
  e.model_name = j.value("model_name", std::string{});
  e.auth_token_env = j.value("auth_token_env", std::string{});
  e.timeout_s = j.value("timeout", e.timeout_s);
  e.max_retries = j.value("max_retries", e.max_retries);
  e.retry_backoff_s = j.value("retry_backoff", e.retry_backoff_s);
  if (j.contains("audit_path")) {
    fs::path p = j["audit_path"].get<std::string>();
    e.audit_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  e.validate();
  return e;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path = p;
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (doc.contains("method")) c.method = parse_method(doc["method"].get<std::string>());
    if (doc.contains("backend")) {
      const auto b = doc["backend"].get<std::string>();
      if (b == "toy") {
        c.backend = BackendKind::toy;
      } else if (b == "remote") {
        c.backend = BackendKind::remote;
      } else {
        throw InputDomainError("unknown backend '" + b + "'");
      }
    }
    if (doc.contains("decode")) {
      const auto& d = doc["decode"];
      c.decode.beta = d.value("beta", c.decode.beta);
      c.decode.steps = d.value("steps", c.decode.steps);
      c.decode.block_count = d.value("block_count", c.decode.block_count);
      c.decode.pool_size = d.value("pool_size", c.decode.pool_size);
      c.decode.temperature = d.value("temperature", c.decode.temperature);
      c.decode.max_len = d.value("max_len", c.decode.max_len);
      c.decode.stop = d.value("stop", c.decode.stop);
    }
    c.best_of_n = doc.value("best_of_n", c.best_of_n);
    if (doc.contains("model")) c.model_path = resolve(doc["model"].get<std::string>());
    if (doc.contains("reward")) c.reward_path = resolve(doc["reward"].get<std::string>());
    if (doc.contains("endpoint")) c.generator_endpoint = parse_endpoint(doc["endpoint"], base_dir);
    if (doc.contains("reward_endpoint")) {
      c.reward_endpoint = parse_endpoint(doc["reward_endpoint"], base_dir);
    }
    if (doc.contains("prompts")) c.prompts_path = resolve(doc["prompts"].get<std::string>());
    if (doc.contains("out")) c.out_path = resolve(doc["out"].get<std::string>());
    c.parallelism = doc.value("parallelism", c.parallelism);
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("latency")) {
      const auto l = doc["latency"].get<std::string>();
      if (l == "auto") {
        c.latency = LatencyMode::automatic;
      } else if (l == "on") {
        c.latency = LatencyMode::on;
      } else if (l == "off") {
        c.latency = LatencyMode::off;
      } else {
        throw InputDomainError("latency must be auto, on or off");
      }
    }
    if (doc.contains("grader")) c.grader = parse_grader(doc["grader"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InputDomainError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputDomainError("config not found: " + path.string());
  return parse_run_config(read_file(path), path.parent_path());
}

std::string config_tag(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["backend"] = config.backend == BackendKind::toy ? "toy" : "remote";
  if (config.backend == BackendKind::toy) {
    j["model"] = read_file(config.model_path);
  } else if (config.generator_endpoint) {
    j["endpoint"] = config.generator_endpoint->base_url;
    j["model"] = config.generator_endpoint->model_name;
  }
  if (config.reward_endpoint) {
    j["reward"] = config.reward_endpoint->base_url;
  } else {
    j["reward"] = read_file(config.reward_path);
  }
  j["temperature"] = config.decode.temperature;
  j["max_len"] = config.decode.max_len;
  j["stop"] = config.decode.stop;
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

BatchSummary execute_run(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto prompts = load_prompts(config.prompts_path);
  std::ofstream out(config.out_path, std::ios::trunc);
  if (!out) throw InputDomainError("cannot write " + config.out_path.string());
  if (prompts.empty()) {
    log << "warning: prompt file " << config.prompts_path.string() << " is empty\n";
    return {};
  }

  BatchSummary summary;
  summary.prompts = prompts.size();
  auto sink = [&](const RunRecord& r) {
    out << to_jsonl(r) << '\n';
    if (r.failed()) {
      ++summary.failures;
      log << "prompt " << r.prompt_id << " failed: " << *r.error << '\n';
    }
  };

  if (config.backend == BackendKind::toy) {
    const ToyLm model(load_toy_model(config.model_path));
    const SyntheticTokenReward reward(load_reward_spec(config.reward_path));
    run_batch<TokenDomain>(model, reward, prompts, config, sink);
  } else {
    const LlmClient client(*config.generator_endpoint);
    const RemoteGenerator generator(client);
    std::unique_ptr<RewardBackend<TextDomain>> reward;
    if (config.reward_endpoint) {
      reward = std::make_unique<RemoteReward>(*config.reward_endpoint);
    } else {
      reward = std::make_unique<SyntheticTextReward>(load_reward_spec(config.reward_path));
    }
    run_batch<TextDomain>(generator, *reward, prompts, config, sink);
    const auto totals = client.totals();
    log << fmt::format("backend: {} requests, {} retries, {} prompt / {} completion tokens, "
                       "{:.1f} ms\n",
                       totals.requests, totals.retries, totals.prompt_tokens,
                       totals.completion_tokens, totals.wall_ms);
  }
  log << fmt::format("{} prompts, {} failures\n", summary.prompts, summary.failures);
  return summary;
}

}  // namespace ebd::harness
