#pragma once

#include "ebd/http_json.hpp"
#include "ebd/reward.hpp"

namespace ebd {

// POST {base_url}/score with {"prompt", "response"} -> {"reward": number}.
class RemoteReward final : public RewardBackend<TextDomain> {
 public:
  explicit RemoteReward(EndpointConfig config);

  RewardScore score(const std::string& prompt,
                    const TextResponse& response) const override;
  JsonPoster& transport() noexcept { return poster_; }

 private:
  JsonPoster poster_;
};

}  // namespace ebd
