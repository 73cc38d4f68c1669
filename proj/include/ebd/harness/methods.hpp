#pragma once

// Per-prompt decoding methods. Each returns a RunRecord whose latency spans
// every backend call of the method, generation and reward alike.

#include <chrono>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "ebd/generator.hpp"
#include "ebd/harness/run_record.hpp"
#include "ebd/reward.hpp"
#include "ebd/sampler.hpp"

namespace ebd::harness {

namespace detail {

inline std::variant<std::monostate, TokenSeq, std::string> to_output(const TokenSeq& r) {
  return r;
}
inline std::variant<std::monostate, TokenSeq, std::string> to_output(const TextResponse& r) {
  return r.text;
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// One prior sample scored once.
template <class Domain>
RunRecord run_direct(const Generator<Domain>& generator,
                     const RewardBackend<Domain>& reward,
                     const typename Domain::Prompt& prompt, const DecodeConfig& config) {
  config.validate();
  detail::Stopwatch clock;
  Rng rng(config.seed);
  RunRecord record;
  record.method = std::string(method_name(Method::direct));
  const auto response = generator.sample_full(prompt, config, rng);
  record.generation_calls = 1;
  const auto score = reward.score(prompt, response);
  record.reward_calls = 1;
  record.output = detail::to_output(response);
  record.raw_reward = score.raw();
  record.latency_ms = clock.elapsed_ms();
  return record;
}

// n independent prior samples; keeps the highest raw reward, lowest index on
// ties.
template <class Domain>
RunRecord run_best_of_n(const Generator<Domain>& generator,
                        const RewardBackend<Domain>& reward,
                        const typename Domain::Prompt& prompt, std::size_t n,
                        const DecodeConfig& config) {
  if (n < 1) throw InputDomainError("best_of_n requires n >= 1");
  config.validate();
  detail::Stopwatch clock;
  Rng rng(config.seed);
  RunRecord record;
  record.method = std::string(method_name(Method::best_of_n));
  std::optional<typename Domain::Response> best;
  double best_score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto response = generator.sample_full(prompt, config, rng);
    ++record.generation_calls;
    const double s = reward.score(prompt, response).raw();
    ++record.reward_calls;
    if (!best || s > best_score) {
      best = std::move(response);
      best_score = s;
    }
  }
  record.output = detail::to_output(*best);
  record.raw_reward = best_score;
  record.latency_ms = clock.elapsed_ms();
  return record;
}

// Full energy-based decode of one prompt.
template <class Domain>
RunRecord run_ebd_record(const Generator<Domain>& generator,
                         const RewardBackend<Domain>& reward,
                         const typename Domain::Prompt& prompt, const DecodeConfig& config) {
  detail::Stopwatch clock;
  auto result = run_ebd(generator, reward, prompt, config);
  RunRecord record;
  record.method = std::string(method_name(Method::ebd));
  record.output = detail::to_output(result.output);
  record.raw_reward = result.state.raw_reward.raw();
  record.advantage = result.state.advantage;
  record.generation_calls = result.state.calls.generation_calls;
  record.reward_calls = result.state.calls.reward_calls;
  if (config.steps > 0) {
    record.acceptance_rate = static_cast<double>(result.state.accepted_steps()) /
                             static_cast<double>(config.steps);
  }
  record.trace = std::move(result.state.trace);
  record.latency_ms = clock.elapsed_ms();
  return record;
}

// Flattens an exception and its nested causes into one message.
std::string describe_exception(const std::exception& e);

}  // namespace ebd::harness
