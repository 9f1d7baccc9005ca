#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ecorag {

enum class TokenizerMode { WhitespacePunct, Whitespace };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::WhitespacePunct;
  bool lowercase = false;
};

// Maximal runs of non-separator characters. Separators are whitespace, plus
// ASCII punctuation in WhitespacePunct mode. Bytes outside ASCII are token
// characters, so UTF-8 text stays intact.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg);

std::size_t count_tokens(std::string_view text, const TokenizerConfig& cfg);

// ODQA answer normalization: lowercase, strip punctuation, drop the articles
// "a"/"an"/"the" as whole tokens, collapse whitespace. Idempotent.
std::string normalize_answer(std::string_view text);

// normalize_answer then split on single spaces.
std::vector<std::string> normalized_tokens(std::string_view text);

// True when `needle` occurs in `haystack` as a contiguous run of whole tokens.
// An empty needle never matches.
bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle);

}  // namespace ecorag
