#include "ebd/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "ebd/error.hpp"

namespace ebd::harness {

std::optional<double> pearson_correctness(const CorrectnessVector& v) {
  if (v.first.size() != v.second.size()) {
    throw InputDomainError("correctness vectors differ in length");
  }
  if (v.first.empty()) throw InputDomainError("correctness vectors are empty");
  // Integer moments keep the result exact for binary data.
  std::int64_t n = 0, sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < v.first.size(); ++i) {
    const int a = v.first[i];
    const int b = v.second[i];
    if (a > 1 || b > 1) throw InputDomainError("correctness entries must be 0 or 1");
    ++n;
    sa += a;
    sb += b;
    sab += a * b;
  }
  // For binary data sum(a^2) == sum(a).
  const std::int64_t var_a = n * sa - sa * sa;
  const std::int64_t var_b = n * sb - sb * sb;
  if (var_a == 0 || var_b == 0) return std::nullopt;
  const double cov = static_cast<double>(n * sab - sa * sb);
  const double r = cov / std::sqrt(static_cast<double>(var_a) * static_cast<double>(var_b));
  return std::clamp(r, -1.0, 1.0);
}

CorrectnessVector correctness_vector(std::span<const RunRecord> first,
                                     std::span<const RunRecord> second) {
  std::map<std::string, bool> other;
  for (const auto& r : second) {
    if (r.correct) other[r.prompt_id] = *r.correct;
  }
  CorrectnessVector v;
  for (const auto& r : first) {
    if (!r.correct) continue;
    const auto it = other.find(r.prompt_id);
    if (it == other.end()) continue;
    v.first.push_back(*r.correct ? 1 : 0);
    v.second.push_back(it->second ? 1 : 0);
  }
  return v;
}

namespace {

constexpr std::string_view kBoxed = "\\boxed{";

// End (exclusive, past the closing brace) of the box opened at `open`, or
// npos when the braces never balance.
std::size_t box_end(std::string_view text, std::size_t open) {
  int depth = 1;
  for (std::size_t i = open + kBoxed.size(); i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

bool has_boxed_answer(std::string_view text) { return last_boxed_answer(text).has_value(); }

std::optional<std::string> last_boxed_answer(std::string_view text) {
  std::optional<std::string> found;
  for (auto pos = text.find(kBoxed); pos != std::string_view::npos;
       pos = text.find(kBoxed, pos + 1)) {
    const auto end = box_end(text, pos);
    if (end != std::string_view::npos) {
      const auto begin = pos + kBoxed.size();
      found = std::string(text.substr(begin, end - 1 - begin));
    }
  }
  return found;
}

bool ResponseValidator::is_valid(std::string_view output) const {
  if (kind == Kind::boxed) return has_boxed_answer(output);
  const std::regex re(pattern, std::regex::ECMAScript);
  return std::regex_search(output.begin(), output.end(), re);
}

double valid_response_rate(std::span<const std::string> outputs,
                           const ResponseValidator& validator) {
  if (outputs.empty()) return 0.0;
  std::size_t valid = 0;
  for (const auto& o : outputs) valid += validator.is_valid(o) ? 1 : 0;
  return static_cast<double>(valid) / static_cast<double>(outputs.size());
}

bool Grader::grade(std::string_view output, std::string_view reference) const {
  if (kind == Kind::exact_match) return trim(output) == trim(reference);
  const auto answer = last_boxed_answer(output);
  return answer && trim(*answer) == trim(reference);
}

Grader parse_grader(std::string_view name) {
  if (name == "exact_match") return {Grader::Kind::exact_match};
  if (name == "boxed_match") return {Grader::Kind::boxed_match};
  throw InputDomainError("unknown grader '" + std::string(name) + "'");
}

}  // namespace ebd::harness
