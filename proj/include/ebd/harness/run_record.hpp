#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ebd/sampler.hpp"
#include "ebd/sequence.hpp"

namespace ebd::harness {

enum class Method { direct, best_of_n, ebd };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

// One line of a prompt file: {"id", "prompt", "reference"?}. "prompt" is a
// string, or an array of token ids for the toy backend.
struct PromptRecord {
  std::string id;
  std::string text;
  std::optional<TokenSeq> tokens;
  std::optional<std::string> reference;
};

// Blank lines are skipped. Throws InputDomainError naming the line on
// malformed input.
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path);
std::vector<PromptRecord> parse_prompts(std::string_view jsonl);

// Outcome of one method on one prompt. A failure record has `error` set and
// no output.
struct RunRecord {
  std::string prompt_id;
  std::string method;
  std::string config_tag;  // fingerprint of the settings shared across methods
  std::variant<std::monostate, TokenSeq, std::string> output;
  std::optional<double> raw_reward;
  std::optional<double> advantage;
  std::optional<double> latency_ms;  // wall clock, generation + reward
  std::size_t generation_calls = 0;
  std::size_t reward_calls = 0;
  std::optional<double> acceptance_rate;
  std::vector<TraceEntry> trace;
  std::optional<bool> correct;
  std::optional<std::string> error;

  bool failed() const noexcept { return error.has_value(); }
  // Tokens rendered as "0 1 2"; text as is; empty for failures.
  std::string output_text() const;
};

// Single-line JSON encoding; fields in a fixed order so output is
// byte-stable.
std::string to_jsonl(const RunRecord& record);
RunRecord record_from_json(std::string_view line);
std::vector<RunRecord> load_records(const std::filesystem::path& path);

}  // namespace ebd::harness
