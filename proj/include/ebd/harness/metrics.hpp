#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebd/harness/run_record.hpp"

namespace ebd::harness {

// Per-prompt binary correctness of two systems over the same prompts.
struct CorrectnessVector {
  std::vector<std::uint8_t> first;
  std::vector<std::uint8_t> second;
};

// Pearson r of the two binary vectors. nullopt when either vector has zero
// variance (correlation undefined). Throws InputDomainError on length
// mismatch, empty input or entries outside {0, 1}.
std::optional<double> pearson_correctness(const CorrectnessVector& v);

// Pairs two record sets by prompt id; prompts missing from either side or
// without a correctness flag are skipped.
CorrectnessVector correctness_vector(std::span<const RunRecord> first,
                                     std::span<const RunRecord> second);

// True when text contains "\boxed{" followed by a matching closing brace.
bool has_boxed_answer(std::string_view text);
// Contents of the last complete \boxed{...}.
std::optional<std::string> last_boxed_answer(std::string_view text);

// Declares what a valid response looks like.
struct ResponseValidator {
  enum class Kind { boxed, regex };
  Kind kind = Kind::boxed;
  std::string pattern;  // ECMAScript regex searched in the output (regex kind)

  bool is_valid(std::string_view output) const;
};

// count(valid) / count(total); 0 for an empty list.
double valid_response_rate(std::span<const std::string> outputs,
                           const ResponseValidator& validator = {});

// Decides correctness of an output against a reference answer.
struct Grader {
  enum class Kind { exact_match, boxed_match };
  Kind kind = Kind::exact_match;

  bool grade(std::string_view output, std::string_view reference) const;
};

Grader parse_grader(std::string_view name);

}  // namespace ebd::harness
