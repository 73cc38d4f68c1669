#pragma once

#include <atomic>
#include <cstddef>
#include <string>
#include <vector>

#include "ebd/generator.hpp"
#include "ebd/http_json.hpp"

namespace ebd {

struct GenerationRequest {
  std::string prompt_text;
  std::string prefix_text;  // empty for a full sample
  double temperature = 1.0;
  std::size_t max_tokens = 1;
  std::vector<std::string> stop;

  // temperature > 0, max_tokens >= 1.
  void validate() const;
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  bool usage_reported = false;  // server sent a usage object
  bool truncated = false;       // finish_reason == "length"
  int retries = 0;
  double wall_ms = 0.0;
};

struct Completion {
  std::string text;  // prefix_text ++ generated continuation
  Usage usage;
};

struct ClientTotals {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double wall_ms = 0.0;
};

// Client for an OpenAI-compatible POST /v1/completions endpoint. Suffix
// requests send prompt_text ++ prefix_text as the prompt so the model
// continues from the prefix.
class LlmClient {
 public:
  explicit LlmClient(EndpointConfig config);

  Completion complete(const GenerationRequest& request) const;
  Completion sample_full(const GenerationRequest& request) const;
  Completion sample_suffix(const GenerationRequest& request) const;

  ClientTotals totals() const;
  JsonPoster& transport() noexcept { return poster_; }

 private:
  JsonPoster poster_;
  mutable std::atomic<std::size_t> requests_{0};
  mutable std::atomic<std::size_t> retries_{0};
  mutable std::atomic<std::size_t> prompt_tokens_{0};
  mutable std::atomic<std::size_t> completion_tokens_{0};
  mutable std::atomic<long long> wall_us_{0};
};

// Generator over a remote completions backend. max_tokens for a suffix is
// the remaining budget L_max minus the prefix's token count; a prefix that
// already fills the budget is returned unchanged without a request.
class RemoteGenerator final : public Generator<TextDomain> {
 public:
  explicit RemoteGenerator(const LlmClient& client) : client_(client) {}

  TextResponse sample_full(const std::string& prompt,
                           const DecodeConfig& config,
                           Rng& rng) const override;
  TextResponse sample_suffix(const std::string& prompt,
                             const TextResponse& prefix,
                             const DecodeConfig& config,
                             Rng& rng) const override;

 private:
  const LlmClient& client_;
};

}  // namespace ebd
