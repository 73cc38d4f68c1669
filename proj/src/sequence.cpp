#include "ebd/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ebd/error.hpp"

namespace ebd {

std::string render_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

TokenSeq parse_tokens(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    TokenId value = 0;
    const auto* first = text.data() + i;
    const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == first ||
        (ptr != text.data() + text.size() &&
         !std::isspace(static_cast<unsigned char>(*ptr)))) {
      throw InputDomainError("malformed token list: '" + std::string(text) + "'");
    }
    out.push_back(value);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  return out;
}

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::vector<std::size_t> word_starts(std::string_view text) {
  // Unit 0 starts at 0; unit k > 0 starts where word k - 1 ends.
  std::vector<std::size_t> starts;
  std::size_t previous_end = 0;
  std::size_t i = 0;
  while (true) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    starts.push_back(starts.empty() ? 0 : previous_end);
    while (i < text.size() && !is_space(text[i])) ++i;
    previous_end = i;
  }
  return starts;
}

std::size_t word_count(std::string_view text) { return word_starts(text).size(); }

std::string word_prefix(std::string_view text, std::size_t units) {
  const auto starts = word_starts(text);
  if (units >= starts.size()) return std::string(text);
  return std::string(text.substr(0, starts[units]));
}

std::size_t estimate_tokens(std::string_view text) {
  return (text.size() + kCharsPerToken - 1) / kCharsPerToken;
}

TokenSeq TokenDomain::prefix(const TokenSeq& r, std::size_t cut) {
  const auto n = std::min(cut, r.size());
  return TokenSeq(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n));
}

TokenSeq TokenDomain::suffix(const TokenSeq& r, std::size_t cut) {
  const auto n = std::min(cut, r.size());
  return TokenSeq(r.begin() + static_cast<std::ptrdiff_t>(n), r.end());
}

TextResponse TextDomain::prefix(const TextResponse& r, std::size_t cut) {
  TextResponse out;
  out.text = word_prefix(r.text, cut);
  if (out.text.size() == r.text.size()) {
    out.token_count = r.token_count;
  } else if (r.token_count && !r.text.empty()) {
    const double share = static_cast<double>(out.text.size()) /
                         static_cast<double>(r.text.size());
    out.token_count = static_cast<std::size_t>(
        std::llround(share * static_cast<double>(*r.token_count)));
  } else {
    out.token_count = estimate_tokens(out.text);
  }
  return out;
}

TextResponse TextDomain::suffix(const TextResponse& r, std::size_t cut) {
  const auto head = word_prefix(r.text, cut);
  return {r.text.substr(head.size()), std::nullopt};
}

}  // namespace ebd
