#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ebd {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

// "0 1 2" rendering used in records and by text graders.
std::string render_tokens(const TokenSeq& tokens);
// Inverse of render_tokens; throws InputDomainError on malformed input.
TokenSeq parse_tokens(std::string_view text);

// A response from a text backend. token_count is the backend-reported
// length when known.
struct TextResponse {
  std::string text;
  std::optional<std::size_t> token_count;

  friend bool operator==(const TextResponse&, const TextResponse&) = default;
};

// Text is cut at whitespace-delimited word boundaries. Unit i is word i
// together with the whitespace that precedes it.
std::vector<std::size_t> word_starts(std::string_view text);
std::size_t word_count(std::string_view text);
// The first `units` units of text; the whole text when units >= word_count.
std::string word_prefix(std::string_view text, std::size_t units);

// Backend token estimate for a text span when no usage field is available.
inline constexpr std::size_t kCharsPerToken = 4;
std::size_t estimate_tokens(std::string_view text);

// Sequence traits for token-level backends (the toy model).
struct TokenDomain {
  using Prompt = TokenSeq;
  using Response = TokenSeq;

  static std::size_t length(const Response& r) { return r.size(); }
  static Response prefix(const Response& r, std::size_t cut);
  static Response suffix(const Response& r, std::size_t cut);
};

// Sequence traits for text backends; lengths and cuts count word units.
struct TextDomain {
  using Prompt = std::string;
  using Response = TextResponse;

  static std::size_t length(const Response& r) { return word_count(r.text); }
  // Token count of the prefix is scaled from the parent's count by
  // character share, or estimated at kCharsPerToken when unknown.
  static Response prefix(const Response& r, std::size_t cut);
  static Response suffix(const Response& r, std::size_t cut);
};

}  // namespace ebd
