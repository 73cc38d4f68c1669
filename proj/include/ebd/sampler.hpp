#pragma once

// Energy-based decoding: a best-in-pool warm start followed by block-wise
// Metropolis-Hastings refinement toward p(y|x) exp(beta * A_x(y)) / Z.
//
// Proposals keep the prefix before a cut and redraw the suffix from the
// prior's own conditional law, with the cut drawn uniformly from block
// starts that do not depend on content. Under those two conditions the
// prior and proposal densities cancel in the MH ratio, so acceptance only
// compares standardized rewards and no likelihood rescoring is needed.

#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebd/decode_config.hpp"
#include "ebd/error.hpp"
#include "ebd/generator.hpp"
#include "ebd/reward.hpp"
#include "ebd/rng.hpp"

namespace ebd {

// Start indices of min(M, max(length, 1)) near-equal contiguous blocks over
// [0, length); earlier blocks take the remainder. Always contains 0 and
// never contains `length`.
std::vector<std::size_t> admissible_cuts(std::size_t length,
                                         std::size_t block_count);

// log of min(1, exp(beta * (adv_new - adv_old))).
double log_acceptance(double adv_new, double adv_old, double beta);
double acceptance_probability(double adv_new, double adv_old, double beta);

struct TraceEntry {
  std::size_t step = 0;
  std::size_t cut = 0;
  double proposal_reward = 0.0;
  double proposal_advantage = 0.0;
  bool accepted = false;
  double alpha = 0.0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct CallCounters {
  std::size_t generation_calls = 0;
  std::size_t reward_calls = 0;

  friend bool operator==(const CallCounters&, const CallCounters&) = default;
};

// Raised when a refinement step fails; the chain state is left as it was
// before the step. The backend error is nested.
class StepError : public Error {
 public:
  StepError(std::size_t step, const std::string& what)
      : Error("refinement step " + std::to_string(step) + " failed: " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Raised when the warm-start pool cannot be built. The backend error is
// nested.
class InitializationError : public Error {
 public:
  InitializationError(std::size_t completed, std::size_t pool_size,
                      const std::string& what)
      : Error("initialization failed after " + std::to_string(completed) +
              "/" + std::to_string(pool_size) + " pool members: " + what),
        completed_(completed) {}
  std::size_t completed() const noexcept { return completed_; }

 private:
  std::size_t completed_;
};

template <class Domain>
class ChainState {
 public:
  using Prompt = typename Domain::Prompt;
  using Response = typename Domain::Response;

  explicit ChainState(Prompt prompt) : prompt(std::move(prompt)) {}

  // A chain whose standardization is given rather than pool-fitted.
  static ChainState start(Prompt prompt, Response current, RewardScore raw,
                          const AdvantageStats& stats) {
    ChainState state(std::move(prompt));
    state.freeze_stats(stats);
    state.current = std::move(current);
    state.raw_reward = raw;
    state.advantage = ebd::advantage(raw, stats);
    return state;
  }

  // Statistics may be set exactly once.
  void freeze_stats(const AdvantageStats& stats) {
    if (stats_) {
      throw StateError("advantage statistics are frozen for this chain");
    }
    stats_.emplace(stats);
  }
  bool frozen() const noexcept { return stats_.has_value(); }
  const AdvantageStats& stats() const {
    if (!stats_) throw StateError("chain is not initialized");
    return *stats_;
  }

  std::size_t accepted_steps() const {
    std::size_t n = 0;
    for (const auto& t : trace) n += t.accepted ? 1 : 0;
    return n;
  }

  Prompt prompt;
  Response current{};
  RewardScore raw_reward{0.0};
  double advantage = 0.0;
  std::size_t step = 0;
  std::vector<TraceEntry> trace;
  CallCounters calls;

 private:
  std::optional<AdvantageStats> stats_;
};

template <class Domain>
struct CutProposal {
  std::size_t cut_index = 0;
  typename Domain::Response suffix;
  typename Domain::Response full;
};

// Stage I: draw pool_size prior samples, fit and freeze the prompt-local
// statistics, start from the best pool member (lowest index on ties).
template <class Domain>
ChainState<Domain> initialize(const Generator<Domain>& generator,
                              const RewardBackend<Domain>& reward,
                              const typename Domain::Prompt& prompt,
                              const DecodeConfig& config, Rng& rng) {
  config.validate();
  std::vector<typename Domain::Response> pool;
  std::vector<RewardScore> scores;
  pool.reserve(config.pool_size);
  scores.reserve(config.pool_size);
  for (std::size_t i = 0; i < config.pool_size; ++i) {
    try {
      pool.push_back(generator.sample_full(prompt, config, rng));
      scores.push_back(reward.score(prompt, pool.back()));
    } catch (const std::exception& e) {
      std::throw_with_nested(
          InitializationError(scores.size(), config.pool_size, e.what()));
    }
  }

  ChainState<Domain> state(prompt);
  state.freeze_stats(fit_stats(scores));
  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (advantage(scores[i], state.stats()) >
        advantage(scores[best], state.stats())) {
      best = i;
    }
  }
  state.current = std::move(pool[best]);
  state.raw_reward = scores[best];
  state.advantage = advantage(scores[best], state.stats());
  state.calls.generation_calls = config.pool_size;
  state.calls.reward_calls = config.pool_size;
  return state;
}

// Keeps current[:cut] and redraws the rest from the prior.
template <class Domain>
CutProposal<Domain> propose_at(const Generator<Domain>& generator,
                               const ChainState<Domain>& state,
                               std::size_t cut, const DecodeConfig& config,
                               Rng& rng) {
  auto prefix = Domain::prefix(state.current, cut);
  auto full = generator.sample_suffix(state.prompt, prefix, config, rng);
  auto suffix = Domain::suffix(full, cut);
  return {cut, std::move(suffix), std::move(full)};
}

// Cut drawn uniformly from admissible_cuts of the current response.
template <class Domain>
CutProposal<Domain> propose(const Generator<Domain>& generator,
                            const ChainState<Domain>& state,
                            const DecodeConfig& config, Rng& rng) {
  const auto cuts =
      admissible_cuts(Domain::length(state.current), config.block_count);
  const std::size_t cut = cuts[rng.index(cuts.size())];
  return propose_at(generator, state, cut, config, rng);
}

// One cut-regenerate-score-accept step: exactly one suffix generation and
// one reward evaluation. On failure the state is untouched and a StepError
// (with the backend error nested) is thrown.
template <class Domain>
void mh_step(const Generator<Domain>& generator,
             const RewardBackend<Domain>& reward, ChainState<Domain>& state,
             const DecodeConfig& config, Rng& rng) {
  if (state.step >= config.steps) {
    throw StateError("chain already completed " + std::to_string(state.step) +
                     " of " + std::to_string(config.steps) + " steps");
  }
  std::optional<CutProposal<Domain>> proposal;
  std::optional<RewardScore> score;
  try {
    proposal.emplace(propose(generator, state, config, rng));
    score.emplace(reward.score(state.prompt, proposal->full));
  } catch (const std::exception& e) {
    std::throw_with_nested(StepError(state.step, e.what()));
  }

  const double proposal_advantage = advantage(*score, state.stats());
  const double log_alpha =
      log_acceptance(proposal_advantage, state.advantage, config.beta);
  const bool accepted = std::log(rng.uniform_positive()) <= log_alpha;

  state.trace.push_back({state.step, proposal->cut_index, score->raw(),
                         proposal_advantage, accepted, std::exp(log_alpha)});
  if (accepted) {
    state.current = std::move(proposal->full);
    state.raw_reward = *score;
    state.advantage = proposal_advantage;
  }
  ++state.step;
  ++state.calls.generation_calls;
  ++state.calls.reward_calls;
}

// Raised by run_ebd when a step fails after initialization. Carries the
// last good state.
template <class Domain>
class PartialRunError : public Error {
 public:
  PartialRunError(ChainState<Domain> last_state, const std::string& what)
      : Error("decoding stopped after " + std::to_string(last_state.step) +
              " completed steps: " + what),
        last_state_(std::move(last_state)) {}
  std::size_t completed_steps() const noexcept { return last_state_.step; }
  const ChainState<Domain>& last_state() const noexcept { return last_state_; }

 private:
  ChainState<Domain> last_state_;
};

template <class Domain>
struct EbdResult {
  typename Domain::Response output;
  ChainState<Domain> state;
};

// Full decode of one prompt: initialize, then config.steps refinement steps,
// all driven by Rng(config.seed).
template <class Domain>
EbdResult<Domain> run_ebd(const Generator<Domain>& generator,
                          const RewardBackend<Domain>& reward,
                          const typename Domain::Prompt& prompt,
                          const DecodeConfig& config) {
  Rng rng(config.seed);
  auto state = initialize(generator, reward, prompt, config, rng);
  while (state.step < config.steps) {
    try {
      mh_step(generator, reward, state, config, rng);
    } catch (const StepError& e) {
      std::throw_with_nested(PartialRunError<Domain>(state, e.what()));
    }
  }
  auto output = state.current;
  return {std::move(output), std::move(state)};
}

}  // namespace ebd
