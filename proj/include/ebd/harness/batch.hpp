#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ebd/harness/methods.hpp"
#include "ebd/harness/metrics.hpp"
#include "ebd/harness/run_record.hpp"
#include "ebd/http_json.hpp"

namespace ebd::harness {

enum class BackendKind { toy, remote };
// automatic: record latency for remote backends only, so toy runs stay
// byte-reproducible.
enum class LatencyMode { automatic, on, off };

struct RunConfig {
  Method method = Method::ebd;
  BackendKind backend = BackendKind::toy;
  DecodeConfig decode;
  std::size_t best_of_n = 4;
  std::filesystem::path model_path;   // toy model spec
  std::filesystem::path reward_path;  // synthetic reward spec
  std::optional<EndpointConfig> generator_endpoint;
  std::optional<EndpointConfig> reward_endpoint;
  std::filesystem::path prompts_path;
  std::filesystem::path out_path;
  std::size_t parallelism = 1;
  std::uint64_t seed = 42;
  LatencyMode latency = LatencyMode::automatic;
  std::optional<Grader> grader;

  // Checks invariants and that input files exist and the output directory
  // is writable.
  void validate() const;
  bool record_latency() const;
};

// Parses a JSON config whose keys mirror the RunConfig fields. Relative
// paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Fingerprint of the settings every method in a comparison must share.
std::string config_tag(const RunConfig& config);

// Delivers records to `write` in index order regardless of completion
// order. Thread-safe.
class OrderedSink {
 public:
  explicit OrderedSink(std::function<void(const RunRecord&)> write)
      : write_(std::move(write)) {}

  void submit(std::size_t index, RunRecord record);

 private:
  std::function<void(const RunRecord&)> write_;
  std::mutex mutex_;
  std::size_t next_ = 0;
  std::map<std::size_t, RunRecord> pending_;
};

template <class Domain>
typename Domain::Prompt prompt_for(const PromptRecord& p);

template <>
inline TokenSeq prompt_for<TokenDomain>(const PromptRecord& p) {
  return p.tokens ? *p.tokens : parse_tokens(p.text);
}

template <>
inline std::string prompt_for<TextDomain>(const PromptRecord& p) {
  return p.text;
}

// Runs one method over one prompt, turning failures into failure records.
// The prompt's decode seed is derive_seed(config.seed, index).
template <class Domain>
RunRecord run_prompt(const Generator<Domain>& generator,
                     const RewardBackend<Domain>& reward, const PromptRecord& prompt,
                     std::size_t index, const RunConfig& config, const std::string& tag) {
  DecodeConfig decode = config.decode;
  decode.seed = derive_seed(config.seed, index);
  RunRecord record;
  try {
    const auto input = prompt_for<Domain>(prompt);
    switch (config.method) {
      case Method::direct:
        record = run_direct(generator, reward, input, decode);
        break;
      case Method::best_of_n:
        record = run_best_of_n(generator, reward, input, config.best_of_n, decode);
        break;
      case Method::ebd:
        record = run_ebd_record(generator, reward, input, decode);
        break;
    }
    if (prompt.reference && config.grader) {
      record.correct = config.grader->grade(record.output_text(), *prompt.reference);
    }
  } catch (const std::exception& e) {
    record = RunRecord{};
    record.method = std::string(method_name(config.method));
    record.error = describe_exception(e);
  }
  record.prompt_id = prompt.id;
  record.config_tag = tag;
  if (!config.record_latency()) record.latency_ms.reset();
  return record;
}

struct BatchSummary {
  std::size_t prompts = 0;
  std::size_t failures = 0;
};

// Runs every prompt under a pool of config.parallelism workers. Records
// reach `sink` in prompt order and are also returned in that order.
template <class Domain>
std::vector<RunRecord> run_batch(const Generator<Domain>& generator,
                                 const RewardBackend<Domain>& reward,
                                 const std::vector<PromptRecord>& prompts,
                                 const RunConfig& config,
                                 const std::function<void(const RunRecord&)>& sink = {}) {
  std::vector<RunRecord> records(prompts.size());
  const std::string tag = config_tag(config);
  OrderedSink ordered([&](const RunRecord& r) {
    if (sink) sink(r);
  });
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      auto record = run_prompt(generator, reward, prompts[i], i, config, tag);
      records[i] = record;
      ordered.submit(i, std::move(record));
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(config.parallelism, prompts.size()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  return records;
}

// Builds the configured backends, runs the batch and writes the records to
// config.out_path as JSONL. Warnings go to `log`.
BatchSummary execute_run(const RunConfig& config, std::ostream& log);

}  // namespace ebd::harness
