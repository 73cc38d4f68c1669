#include "ebd/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd {

RewardScore::RewardScore(double raw) : raw_(raw) {
  if (!std::isfinite(raw)) throw DataError("reward score is not finite");
}

Standardizer::Standardizer(double mean, double std) : mean_(mean), std_(std) {
  if (!std::isfinite(mean) || !std::isfinite(std)) {
    throw InputDomainError("standardization parameters must be finite");
  }
  if (std < kStdFloor) {
    throw InputDomainError("standardization std below floor: " + std::to_string(std));
  }
}

AdvantageStats::AdvantageStats(Standardizer standardizer, std::size_t pool_size)
    : standardizer_(standardizer), pool_size_(pool_size) {
  if (pool_size < 1) throw InputDomainError("pool_size must be >= 1");
}

AdvantageStats fit_stats(std::span<const RewardScore> rewards) {
  if (rewards.empty()) throw InputDomainError("cannot fit statistics on an empty pool");
  const double n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (const auto& r : rewards) sum += r.raw();
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& r : rewards) ss += (r.raw() - mean) * (r.raw() - mean);
  const double std = std::max(std::sqrt(ss / n), kStdFloor);
  return AdvantageStats(Standardizer(mean, std), rewards.size());
}

namespace {

bool contains_tokens(const TokenSeq& haystack, const TokenSeq& needle) {
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

double count_penalty(std::size_t length, std::size_t desired) {
  return -std::abs(static_cast<double>(length) - static_cast<double>(desired));
}

}  // namespace

SyntheticTokenReward::SyntheticTokenReward(SyntheticRewardSpec spec)
    : spec_(std::move(spec)) {}

RewardScore SyntheticTokenReward::score(const TokenSeq& /*prompt*/,
                                        const TokenSeq& response) const {
  if (const auto* t = std::get_if<TargetSubstring>(&spec_)) {
    return RewardScore(contains_tokens(response, t->tokens) ? 1.0 : 0.0);
  }
  if (const auto* c = std::get_if<TokenCountMatch>(&spec_)) {
    return RewardScore(count_penalty(response.size(), c->desired));
  }
  const auto& table = std::get<LookupTable>(spec_).scores;
  const auto it = table.find(response);
  if (it == table.end()) {
    throw DataError("lookup-table reward has no entry for [" +
                    render_tokens(response) + "]");
  }
  return RewardScore(it->second);
}

SyntheticTextReward::SyntheticTextReward(SyntheticRewardSpec spec)
    : spec_(std::move(spec)) {
  if (std::holds_alternative<LookupTable>(spec_)) {
    throw InputDomainError("lookup-table rewards need a token backend");
  }
}

RewardScore SyntheticTextReward::score(const std::string& /*prompt*/,
                                       const TextResponse& response) const {
  if (const auto* t = std::get_if<TargetSubstring>(&spec_)) {
    return RewardScore(response.text.find(t->text) != std::string::npos ? 1.0 : 0.0);
  }
  const auto& c = std::get<TokenCountMatch>(spec_);
  return RewardScore(count_penalty(word_count(response.text), c.desired));
}

SyntheticRewardSpec parse_reward_spec(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "target-substring") {
      TargetSubstring spec;
      const auto& target = doc.at("target");
      if (target.is_string()) {
        spec.text = target.get<std::string>();
      } else {
        spec.tokens = target.get<TokenSeq>();
      }
      return spec;
    }
    if (kind == "token-count-match") {
      return TokenCountMatch{doc.at("desired").get<std::size_t>()};
    }
    if (kind == "lookup-table") {
      LookupTable spec;
      for (const auto& entry : doc.at("table")) {
        auto tokens = entry.at("tokens").get<TokenSeq>();
        const double value = entry.at("score").get<double>();
        if (!std::isfinite(value)) throw DataError("lookup-table score is not finite");
        if (!spec.scores.emplace(std::move(tokens), value).second) {
          throw InputDomainError("duplicate lookup-table entry");
        }
      }
      return spec;
    }
    throw InputDomainError("unknown reward kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputDomainError(std::string("malformed reward spec: ") + e.what());
  }
}

SyntheticRewardSpec load_reward_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputDomainError("cannot open reward spec " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_reward_spec(text.str());
}

}  // namespace ebd
