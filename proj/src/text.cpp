#include "ecorag/text.hpp"

#include <cctype>

namespace ecorag {

namespace {

bool is_separator(unsigned char c, TokenizerMode mode) {
  if (std::isspace(c)) return true;
  return mode == TokenizerMode::WhitespacePunct && std::ispunct(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (is_separator(c, cfg.mode)) {
      if (!cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(cfg.lowercase ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t count_tokens(std::string_view text, const TokenizerConfig& cfg) {
  std::size_t n = 0;
  bool in_token = false;
  for (char ch : text) {
    bool sep = is_separator(static_cast<unsigned char>(ch), cfg.mode);
    if (!sep && !in_token) ++n;
    in_token = !sep;
  }
  return n;
}

std::string normalize_answer(std::string_view text) {
  // Lowercase and delete punctuation in one pass; "U.S." becomes "us".
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }

  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (word != "a" && word != "an" && word != "the") {
      if (!out.empty()) out.push_back(' ');
      out += word;
    }
    word.clear();
  };
  for (char ch : cleaned) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      word.push_back(ch);
    }
  }
  flush();
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string norm = normalize_answer(text);
  std::string word;
  for (char ch : norm) {
    if (ch == ' ') {
      if (!word.empty()) out.push_back(std::move(word));
      word.clear();
    } else {
      word.push_back(ch);
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (haystack[i + j] != needle[j]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace ecorag
