#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecorag/text.hpp"

namespace ecorag {

struct DocumentRecord {
  std::string id;
  std::optional<std::string> title;
  std::string body;
};

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;  // retrieval order preserved below
  std::vector<DocumentRecord> documents;
};

// One sentence cut out of a document body. `text` is exactly
// body.substr(begin, end - begin); joining all spans of a document plus the
// skipped whitespace gaps reproduces the body byte for byte.
struct SentenceUnit {
  std::string id;      // "<doc_id>#<index>"
  std::string doc_id;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t token_count = 0;
};

// Rule-based splitter: a sentence ends at '.', '!' or '?' followed by
// whitespace and an uppercase letter, or by end of text. A '.' closing a
// known abbreviation (Dr., U.S., e.g., ...) does not end a sentence.
std::vector<SentenceUnit> split_sentences(std::string_view body,
                                          std::string_view doc_id,
                                          const TokenizerConfig& cfg);

// All sentences of a record, documents in retrieval order.
std::vector<SentenceUnit> question_sentences(const QuestionRecord& record,
                                             const TokenizerConfig& cfg);

struct LoadReport {
  std::vector<std::string> warnings;  // one per skipped line in lenient mode
  std::size_t skipped = 0;
};

// JSON-lines ingestion. Strict mode throws on the first malformed line;
// lenient mode skips it and records a warning naming the line and key.
std::vector<QuestionRecord> load_dataset(const std::string& path, bool strict,
                                         LoadReport* report = nullptr);

}  // namespace ecorag
