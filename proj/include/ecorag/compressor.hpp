#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecorag/corpus.hpp"
#include "ecorag/encoder.hpp"
#include "ecorag/evaluator.hpp"

namespace ecorag {

struct ScoredSentence {
  SentenceUnit sentence;
  double score = 0.0;
  std::size_t corpus_position = 0;  // index in the question's flattened sentence list
};

// Sentences in descending score order; ties keep the input order, which is
// (document rank, sentence position).
struct RankedEvidence {
  std::vector<ScoredSentence> items;
};

RankedEvidence rank_sentences(const EncoderModel& model, const std::string& question,
                              const std::vector<SentenceUnit>& sentences);

struct CompressionLimits {
  std::size_t max_pieces = 20;
  std::size_t step = 4;
  std::optional<std::size_t> max_tokens;  // absent = no token budget
};

enum class StopReason { Evidential, PieceLimit, TokenLimit, Exhausted };

std::string stop_reason_name(StopReason reason);
StopReason stop_reason_from_name(const std::string& name);

struct CompressionResult {
  std::string qid;
  std::vector<SentenceUnit> selected;  // prefix of the ranking, selection order
  std::string text;                    // space-joined selected sentences
  std::vector<Verdict> verdicts;       // one per evaluator call
  StopReason stop_reason = StopReason::Exhausted;
  std::size_t token_count = 0;
  std::size_t evaluator_calls = 0;
};

// An evaluator failure mid-loop; carries everything decided before the
// failure (the partial's stop_reason is meaningless).
class CompressionError : public std::runtime_error {
 public:
  CompressionError(const std::string& message, CompressionResult partial)
      : std::runtime_error(message), partial_(std::move(partial)) {}
  const CompressionResult& partial() const { return partial_; }

 private:
  CompressionResult partial_;
};

// Grow-and-reflect selection: start with the top-ranked sentence, ask the
// evaluator, extend by `step` pieces while the verdict is NOT, clipped to
// availability, max_pieces, and the token budget. A piece that would push
// past max_tokens is never added — including the first one, so a top piece
// larger than the whole budget yields an empty selection with zero calls.
// When document_order is set the selected sentences are joined in corpus
// order instead of score order (selection itself is unchanged).
CompressionResult adaptive_compress(const std::string& question,
                                    const RankedEvidence& ranked, Evaluator& evaluator,
                                    const CompressionLimits& limits,
                                    bool document_order = false);

struct CompressOptions {
  CompressionLimits limits;
  TokenizerConfig tokenizer;  // used to split and count record sentences
  bool strict = false;        // strict: first record failure aborts
  int workers = 1;            // >1 needs a thread-safe evaluator and clock
  bool document_order = false;
  // Seconds timestamp source for the summary's stage timers; defaults to the
  // monotonic clock. Injectable so reports can be byte-stable in tests.
  std::function<double()> clock;
};

struct CompressionSummary {
  std::size_t records = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;  // "qid: message"
  double mean_tokens = 0.0;
  double median_tokens = 0.0;  // lower middle for even counts
  std::size_t total_evaluator_calls = 0;
  double mean_evaluator_calls = 0.0;
  std::map<std::string, std::size_t> stop_reasons;  // name -> count
  // Cumulative per-record seconds spent ranking vs running the loop.
  double ranking_seconds = 0.0;
  double evaluation_seconds = 0.0;
  double total_seconds = 0.0;
};

struct CompressOutcome {
  std::vector<CompressionResult> results;  // record order, failures omitted
  CompressionSummary summary;
};

CompressOutcome compress_dataset(const std::vector<QuestionRecord>& records,
                                 const EncoderModel& model, Evaluator& evaluator,
                                 const CompressOptions& options = {});

// JSON lines: {"qid","selected_sids":[...],"text","tokens","stop_reason",
// "evaluator_calls"}.
void save_compression_results(const std::vector<CompressionResult>& results,
                              const std::string& path);

}  // namespace ecorag
