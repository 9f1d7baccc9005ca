#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecorag/compressor.hpp"
#include "ecorag/corpus.hpp"
#include "ecorag/encoder.hpp"
#include "ecorag/evaluator.hpp"
#include "ecorag/oracle.hpp"

namespace ecorag {

enum class StrategyKind {
  NoCompression,   // concatenate every document
  ClosedBook,      // no context at all
  TopkTruncation,  // top-k sentences by encoder score
  Threshold,       // every sentence scoring at or above a threshold
  EcoragAdaptive,  // grow-and-reflect compression
};

std::string strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_name(const std::string& name);

struct StrategySpec {
  std::string name;  // defaults to the kind name when empty
  StrategyKind kind = StrategyKind::NoCompression;
  std::size_t topk = 20;      // topk_truncation only
  double threshold = 0.0;     // threshold only
  CompressionLimits limits;   // ecorag_adaptive only
};

struct QuestionResult {
  std::string qid;
  int em = 0;
  double f1 = 0.0;
  std::size_t tokens = 0;
  double compression_seconds = 0.0;  // context construction
  double inference_seconds = 0.0;    // oracle call
};

struct EvalReport {
  std::string strategy;
  StrategyKind kind = StrategyKind::NoCompression;
  std::vector<QuestionResult> per_question;
  // Aggregates are plain arithmetic means of the per-question values.
  double em_percent = 0.0;
  double f1_percent = 0.0;
  double mean_tokens = 0.0;
  // Ranking metrics exist only for encoder-backed strategies.
  bool has_ranking_metrics = false;
  double r20_rate = 0.0;
  std::map<std::size_t, double> ndcg;  // cutoff -> mean NDCG
  double compression_seconds = 0.0;
  double inference_seconds = 0.0;
  double total_seconds = 0.0;  // compression + inference
  double throughput = 0.0;     // questions per total second (0 when time is 0)
};

struct BenchOptions {
  MatchMode match = MatchMode::Containment;
  TokenizerConfig tokenizer;  // token counting and sentence splitting
  std::string template_id = "qa-fewshot-v1";
  std::vector<std::size_t> ndcg_cutoffs = {1, 10};
  bool document_order = false;  // adaptive strategy's join order
  // Seconds timestamp source; defaults to the monotonic clock. Injectable so
  // scripted runs produce byte-identical reports.
  std::function<double()> clock;
};

// Runs every strategy over every record: build the context, ask the oracle
// once, score EM/F1, and record tokens plus stage timings. Components are
// validated up front — a strategy that needs the encoder or evaluator fails
// before any oracle call. Identical contexts share oracle cache keys across
// strategies by construction.
std::vector<EvalReport> run_benchmark(const std::vector<QuestionRecord>& records,
                                      const std::vector<StrategySpec>& strategies,
                                      Oracle& oracle, const EncoderModel* encoder,
                                      Evaluator* evaluator,
                                      const BenchOptions& options = {});

// One JSON summary for a strategy: aggregates plus timing, no per-question rows.
void write_report_json(const EvalReport& report, const std::string& path);
// Per-question rows: qid,em,f1,tokens,compression_seconds,inference_seconds.
void write_report_csv(const EvalReport& report, const std::string& path);
// Fixed-width text comparison across strategies, one row per strategy.
std::string comparison_table(const std::vector<EvalReport>& reports);
void write_comparison_table(const std::vector<EvalReport>& reports,
                            const std::string& path);

}  // namespace ecorag
