#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <string_view>
#include <variant>
#include <vector>

#include "ebd/generator.hpp"
#include "ebd/seq_distribution.hpp"

namespace ebd {

// Every response has exactly `length` tokens.
struct FixedLength {
  std::size_t length = 0;
};

// Before each token the model stops with `stop_probability`; it is forced
// to stop at `max_length`.
struct StochasticLength {
  double stop_probability = 0.0;
  std::size_t max_length = 0;
};

using LengthMode = std::variant<FixedLength, StochasticLength>;

// Declarative n-gram prior over an integer vocabulary.
//
// order 1: transition_table has one row, the unconditional next-token law.
// order 2: transition_table has vocab_size + 1 rows. Row 0 is the law at the
//          start of the response when the prompt is empty; row t + 1 is the
//          law after token t.
struct ToyModelSpec {
  std::size_t vocab_size = 0;
  int order = 1;
  std::vector<std::vector<double>> transition_table;
  LengthMode length_mode = FixedLength{};

  // Throws InputDomainError when a row is not a probability vector (sum to 1
  // within 1e-12, entries >= 0) or the shape does not match the order.
  void validate() const;
};

// Parses the JSON model document:
//   {"vocab_size": 3, "order": 1,
//    "length_mode": {"kind": "fixed", "length": 4}
//                 | {"kind": "stochastic", "stop_probability": 0.2,
//                    "max_length": 6},
//    "transition_table": [[...], ...]}
ToyModelSpec parse_toy_model(std::string_view json_text);
ToyModelSpec load_toy_model(const std::filesystem::path& path);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// Exact, enumerable generator used as the prior in correctness tests.
// Immutable after construction and shareable across threads.
class ToyLm final : public Generator<TokenDomain> {
 public:
  explicit ToyLm(ToyModelSpec spec);

  const ToyModelSpec& spec() const noexcept { return spec_; }

  TokenSeq sample_full(const TokenSeq& prompt, const DecodeConfig& config,
                       Rng& rng) const override;
  TokenSeq sample_suffix(const TokenSeq& prompt, const TokenSeq& prefix,
                         const DecodeConfig& config, Rng& rng) const override;

  // log p(response | prompt) including the stop event; kNegInf when the
  // response is unreachable.
  double log_prob(const TokenSeq& prompt, const TokenSeq& response,
                  const DecodeConfig& config = {}) const;
  // Marginal log-probability that a response starts with `prefix` (token
  // events only, no stop event).
  double prefix_log_prob(const TokenSeq& prompt, const TokenSeq& prefix,
                         const DecodeConfig& config = {}) const;
  // log p(response[cut:] | prompt, response[:cut]) including the stop event.
  double conditional_log_prob(const TokenSeq& prompt, const TokenSeq& response,
                              std::size_t cut,
                              const DecodeConfig& config = {}) const;

  // Every reachable response with its exact probability. Throws
  // CapacityError when the response space exceeds `cap`.
  SeqDistribution enumerate(const TokenSeq& prompt,
                            const DecodeConfig& config = {},
                            std::size_t cap = kDefaultEnumerationCap) const;

  // Longest response the model can emit under `config`.
  std::size_t length_cap(const DecodeConfig& config) const;

 private:
  // Law of the next event given the last token of prompt ++ response (or
  // none) and the current response length. Index 0 is the stop event,
  // index t + 1 is token t.
  void next_event_law(const TokenSeq& prompt, const TokenSeq& response,
                      const DecodeConfig& config,
                      std::vector<double>& law) const;
  void check_tokens(const TokenSeq& tokens, const char* what) const;
  void extend(const TokenSeq& prompt, TokenSeq& response,
              const DecodeConfig& config, Rng& rng) const;

  ToyModelSpec spec_;
};

}  // namespace ebd
