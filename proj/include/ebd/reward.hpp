#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "ebd/sequence.hpp"

namespace ebd {

// Raw scalar reward R(y, x). Always finite.
class RewardScore {
 public:
  // Throws DataError for non-finite values.
  explicit RewardScore(double raw);
  double raw() const noexcept { return raw_; }

  friend bool operator==(const RewardScore&, const RewardScore&) = default;

 private:
  double raw_;
};

// Scores complete prompt-response pairs. Must be safe to call concurrently.
template <class Domain>
class RewardBackend {
 public:
  virtual ~RewardBackend() = default;
  virtual RewardScore score(const typename Domain::Prompt& prompt,
                            const typename Domain::Response& response) const = 0;
};

inline constexpr double kStdFloor = 1e-6;

// Fixed affine standardization (r - mean) / std with std >= kStdFloor.
class Standardizer {
 public:
  // Throws InputDomainError for std < kStdFloor or non-finite inputs.
  Standardizer(double mean, double std);

  double mean() const noexcept { return mean_; }
  double std() const noexcept { return std_; }
  double apply(double raw) const noexcept { return (raw - mean_) / std_; }

 private:
  double mean_;
  double std_;
};

// Prompt-local reward statistics fitted on the warm-start pool. Immutable.
class AdvantageStats {
 public:
  AdvantageStats(Standardizer standardizer, std::size_t pool_size);

  double mean() const noexcept { return standardizer_.mean(); }
  double std() const noexcept { return standardizer_.std(); }
  std::size_t pool_size() const noexcept { return pool_size_; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }

 private:
  Standardizer standardizer_;
  std::size_t pool_size_;
};

// Arithmetic mean and population standard deviation (floored at
// kStdFloor). Throws InputDomainError on an empty pool.
AdvantageStats fit_stats(std::span<const RewardScore> rewards);

inline double advantage(const RewardScore& raw, const AdvantageStats& stats) {
  return stats.standardizer().apply(raw.raw());
}

// --- synthetic rewards -----------------------------------------------------

// 1.0 when the target occurs contiguously in the response, else 0.0.
struct TargetSubstring {
  TokenSeq tokens;   // token backends
  std::string text;  // text backends
};
// -|length - desired|; length counts tokens or words.
struct TokenCountMatch {
  std::size_t desired = 0;
};
// Explicit response -> score map; unknown responses are a DataError.
struct LookupTable {
  std::map<TokenSeq, double> scores;
};

using SyntheticRewardSpec =
    std::variant<TargetSubstring, TokenCountMatch, LookupTable>;

// Scores TokenSeq responses.
class SyntheticTokenReward final : public RewardBackend<TokenDomain> {
 public:
  explicit SyntheticTokenReward(SyntheticRewardSpec spec);
  RewardScore score(const TokenSeq& prompt,
                    const TokenSeq& response) const override;
  const SyntheticRewardSpec& spec() const noexcept { return spec_; }

 private:
  SyntheticRewardSpec spec_;
};

// Scores text responses; lookup tables are not supported.
class SyntheticTextReward final : public RewardBackend<TextDomain> {
 public:
  explicit SyntheticTextReward(SyntheticRewardSpec spec);
  RewardScore score(const std::string& prompt,
                    const TextResponse& response) const override;

 private:
  SyntheticRewardSpec spec_;
};

// Parses a synthetic reward document:
//   {"kind": "target-substring", "target": [1, 2]}   (or "target": "text")
//   {"kind": "token-count-match", "desired": 4}
//   {"kind": "lookup-table", "table": [{"tokens": [0, 1], "score": 2.0}, ...]}
SyntheticRewardSpec parse_reward_spec(std::string_view json_text);
SyntheticRewardSpec load_reward_spec(const std::filesystem::path& path);

}  // namespace ebd
