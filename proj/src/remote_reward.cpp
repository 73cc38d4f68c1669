#include "ebd/remote_reward.hpp"

#include <cmath>

#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd {

RemoteReward::RemoteReward(EndpointConfig config) : poster_(std::move(config)) {}

RewardScore RemoteReward::score(const std::string& prompt,
                                const TextResponse& response) const {
  nlohmann::ordered_json body;
  body["prompt"] = prompt;
  body["response"] = response.text;
  const auto result = poster_.post("/score", body.dump());
  const auto doc = nlohmann::json::parse(result.body, nullptr, false);
  if (!doc.is_object() || !doc.contains("reward") || !doc["reward"].is_number()) {
    throw DataError("score response lacks a numeric 'reward': " + result.body);
  }
  const double value = doc["reward"].get<double>();
  if (!std::isfinite(value)) throw DataError("server returned a non-finite reward");
  return RewardScore(value);
}

}  // namespace ebd
