#include "ebd/llm_client.hpp"

#include <cmath>

#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd {

void GenerationRequest::validate() const {
  if (!(temperature > 0.0)) throw InputDomainError("temperature must be > 0");
  if (max_tokens < 1) throw InputDomainError("max_tokens must be >= 1");
}

LlmClient::LlmClient(EndpointConfig config) : poster_(std::move(config)) {}

Completion LlmClient::complete(const GenerationRequest& request) const {
  request.validate();
  nlohmann::ordered_json body;
  body["model"] = poster_.config().model_name;
  body["prompt"] = request.prompt_text + request.prefix_text;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["stop"] = request.stop;

  const auto result = poster_.post("/v1/completions", body.dump());

  Completion out;
  try {
    const auto doc = nlohmann::json::parse(result.body);
    const auto& choice = doc.at("choices").at(0);
    out.text = request.prefix_text + choice.at("text").get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.usage.truncated = choice["finish_reason"].get<std::string>() == "length";
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      const auto& usage = doc["usage"];
      out.usage.prompt_tokens = usage.value("prompt_tokens", std::size_t{0});
      out.usage.completion_tokens = usage.value("completion_tokens", std::size_t{0});
      out.usage.usage_reported = usage.contains("completion_tokens");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed completions response: ") + e.what());
  }
  out.usage.retries = result.retries;
  out.usage.wall_ms = result.wall_ms;

  requests_ += 1;
  retries_ += static_cast<std::size_t>(result.retries);
  prompt_tokens_ += out.usage.prompt_tokens;
  completion_tokens_ += out.usage.completion_tokens;
  wall_us_ += static_cast<long long>(std::llround(result.wall_ms * 1000.0));
  return out;
}

Completion LlmClient::sample_full(const GenerationRequest& request) const {
  if (!request.prefix_text.empty()) {
    throw InputDomainError("sample_full takes an empty prefix");
  }
  return complete(request);
}

Completion LlmClient::sample_suffix(const GenerationRequest& request) const {
  return complete(request);
}

ClientTotals LlmClient::totals() const {
  return {requests_.load(), retries_.load(), prompt_tokens_.load(),
          completion_tokens_.load(), static_cast<double>(wall_us_.load()) / 1000.0};
}

namespace {

TextResponse to_response(const Completion& c, std::size_t prefix_tokens,
                         std::size_t new_text_chars) {
  const std::size_t generated = c.usage.usage_reported
                                    ? c.usage.completion_tokens
                                    : (new_text_chars + kCharsPerToken - 1) / kCharsPerToken;
  return {c.text, prefix_tokens + generated};
}

}  // namespace

TextResponse RemoteGenerator::sample_full(const std::string& prompt,
                                          const DecodeConfig& config, Rng& /*rng*/) const {
  config.validate();
  GenerationRequest req{prompt, "", config.temperature, config.max_len, config.stop};
  const auto completion = client_.sample_full(req);
  return to_response(completion, 0, completion.text.size());
}

TextResponse RemoteGenerator::sample_suffix(const std::string& prompt,
                                            const TextResponse& prefix,
                                            const DecodeConfig& config, Rng& /*rng*/) const {
  config.validate();
  const std::size_t prefix_tokens =
      prefix.token_count ? *prefix.token_count : estimate_tokens(prefix.text);
  if (prefix_tokens >= config.max_len) return {prefix.text, prefix_tokens};
  GenerationRequest req{prompt, prefix.text, config.temperature,
                        config.max_len - prefix_tokens, config.stop};
  const auto completion = client_.sample_suffix(req);
  return to_response(completion, prefix_tokens, completion.text.size() - prefix.text.size());
}

}  // namespace ebd
