#include "ecorag/compressor.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecorag {

using nlohmann::json;

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::Evidential: return "EVIDENTIAL";
    case StopReason::PieceLimit: return "PIECE_LIMIT";
    case StopReason::TokenLimit: return "TOKEN_LIMIT";
    case StopReason::Exhausted: return "EXHAUSTED";
  }
  return "EXHAUSTED";
}

StopReason stop_reason_from_name(const std::string& name) {
  if (name == "EVIDENTIAL") return StopReason::Evidential;
  if (name == "PIECE_LIMIT") return StopReason::PieceLimit;
  if (name == "TOKEN_LIMIT") return StopReason::TokenLimit;
  if (name == "EXHAUSTED") return StopReason::Exhausted;
  throw std::runtime_error("unknown stop reason: " + name);
}

RankedEvidence rank_sentences(const EncoderModel& model, const std::string& question,
                              const std::vector<SentenceUnit>& sentences) {
  if (sentences.empty()) {
    throw std::runtime_error("cannot rank an empty sentence list");
  }
  const std::vector<double> scores = score_sentences(model, question, sentences);
  RankedEvidence ranked;
  ranked.items.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    ranked.items.push_back({sentences[i], scores[i], i});
  }
  // stable: equal scores keep (document rank, sentence position) order
  std::stable_sort(ranked.items.begin(), ranked.items.end(),
                   [](const ScoredSentence& a, const ScoredSentence& b) {
                     return a.score > b.score;
                   });
  return ranked;
}

namespace {

void check_limits(const CompressionLimits& limits) {
  if (limits.max_pieces == 0) throw std::runtime_error("max_pieces must be positive");
  if (limits.step == 0) throw std::runtime_error("step must be positive");
  if (limits.step > limits.max_pieces) {
    throw std::runtime_error("step must not exceed max_pieces");
  }
  if (limits.max_tokens && *limits.max_tokens == 0) {
    throw std::runtime_error("max_tokens must be positive when set");
  }
}

// The selected prefix lives in score order; `positions` carries each selected
// sentence's index in the question's flattened sentence list so corpus order
// can be recovered when asked for.
std::string join_selected(const std::vector<SentenceUnit>& selected,
                          const std::vector<std::size_t>& positions,
                          bool document_order) {
  std::vector<std::size_t> order(selected.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (document_order) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return positions[a] < positions[b];
    });
  }
  std::string text;
  for (std::size_t i : order) {
    if (!text.empty()) text += " ";
    text += selected[i].text;
  }
  return text;
}

}  // namespace

CompressionResult adaptive_compress(const std::string& question,
                                    const RankedEvidence& ranked, Evaluator& evaluator,
                                    const CompressionLimits& limits, bool document_order) {
  check_limits(limits);
  if (ranked.items.empty()) {
    throw std::runtime_error("cannot compress an empty ranking");
  }

  CompressionResult result;
  std::vector<std::size_t> positions;  // corpus positions of result.selected
  std::size_t budget_used = 0;

  auto fits = [&](const SentenceUnit& s) {
    return !limits.max_tokens || budget_used + s.token_count <= *limits.max_tokens;
  };
  // Grow the selected prefix toward `target`, stopping early at any limit.
  auto grow_to = [&](std::size_t target) {
    target = std::min({target, limits.max_pieces, ranked.items.size()});
    while (result.selected.size() < target) {
      const ScoredSentence& next = ranked.items[result.selected.size()];
      if (!fits(next.sentence)) break;
      budget_used += next.sentence.token_count;
      result.selected.push_back(next.sentence);
      positions.push_back(next.corpus_position);
    }
  };

  std::size_t target = 1;
  while (true) {
    const std::size_t before = result.selected.size();
    grow_to(target);
    if (result.selected.size() == before) {
      // Nothing could be added. Only reachable when the budget blocks the
      // very first piece: later iterations return a verdict first.
      result.stop_reason = StopReason::TokenLimit;
      break;
    }
    result.text = join_selected(result.selected, positions, document_order);
    result.token_count = budget_used;

    Verdict verdict;
    try {
      verdict = evaluator.assess(question, result.text);
    } catch (const std::exception& e) {
      throw CompressionError(
          "evaluator failed after " + std::to_string(result.evaluator_calls) +
              " calls: " + e.what(),
          result);
    }
    ++result.evaluator_calls;
    result.verdicts.push_back(verdict);
    if (verdict == Verdict::Evi) {
      result.stop_reason = StopReason::Evidential;
      break;
    }
    if (result.selected.size() == limits.max_pieces) {
      result.stop_reason = StopReason::PieceLimit;
      break;
    }
    if (result.selected.size() == ranked.items.size()) {
      result.stop_reason = StopReason::Exhausted;
      break;
    }
    if (!fits(ranked.items[result.selected.size()].sentence)) {
      result.stop_reason = StopReason::TokenLimit;
      break;
    }
    target = result.selected.size() + limits.step;
  }

  result.text = join_selected(result.selected, positions, document_order);
  result.token_count = budget_used;
  return result;
}

CompressOutcome compress_dataset(const std::vector<QuestionRecord>& records,
                                 const EncoderModel& model, Evaluator& evaluator,
                                 const CompressOptions& options) {
  check_limits(options.limits);
  std::function<double()> clock = options.clock;
  if (!clock) {
    clock = [] {
      return std::chrono::duration<double>(
                 std::chrono::steady_clock::now().time_since_epoch())
          .count();
    };
  }

  CompressOutcome out;
  const double started = clock();

  struct PerRecord {
    CompressionResult result;
    std::string error;
    double rank_seconds = 0.0;
    double eval_seconds = 0.0;
    bool ok = false;
  };
  std::vector<PerRecord> slots(records.size());

  int workers = options.workers < 1 ? 1 : options.workers;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (std::size_t i = 0; i < records.size(); ++i) {
    PerRecord& slot = slots[i];
    try {
      const double t0 = clock();
      const auto sentences = question_sentences(records[i], options.tokenizer);
      const RankedEvidence ranked = rank_sentences(model, records[i].question, sentences);
      const double t1 = clock();
      slot.result = adaptive_compress(records[i].question, ranked, evaluator,
                                      options.limits, options.document_order);
      const double t2 = clock();
      slot.result.qid = records[i].id;
      slot.rank_seconds = t1 - t0;
      slot.eval_seconds = t2 - t1;
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i].ok) continue;
    if (options.strict) {
      throw std::runtime_error("compression failed for " + records[i].id + ": " +
                               slots[i].error);
    }
    ++out.summary.failures;
    out.summary.failure_messages.push_back(records[i].id + ": " + slots[i].error);
  }

  std::vector<std::size_t> token_counts;
  for (auto& slot : slots) {
    if (!slot.ok) continue;
    out.summary.ranking_seconds += slot.rank_seconds;
    out.summary.evaluation_seconds += slot.eval_seconds;
    token_counts.push_back(slot.result.token_count);
    out.summary.total_evaluator_calls += slot.result.evaluator_calls;
    ++out.summary.stop_reasons[stop_reason_name(slot.result.stop_reason)];
    out.results.push_back(std::move(slot.result));
  }
  out.summary.records = out.results.size();
  if (!out.results.empty()) {
    double token_sum = 0.0;
    for (std::size_t t : token_counts) token_sum += static_cast<double>(t);
    out.summary.mean_tokens = token_sum / static_cast<double>(token_counts.size());
    std::sort(token_counts.begin(), token_counts.end());
    out.summary.median_tokens =
        static_cast<double>(token_counts[(token_counts.size() - 1) / 2]);
    out.summary.mean_evaluator_calls =
        static_cast<double>(out.summary.total_evaluator_calls) /
        static_cast<double>(out.results.size());
  }
  out.summary.total_seconds = clock() - started;
  return out;
}

void save_compression_results(const std::vector<CompressionResult>& results,
                              const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write compression results to " + path);
  for (const auto& r : results) {
    json line;
    line["qid"] = r.qid;
    json sids = json::array();
    for (const auto& s : r.selected) sids.push_back(s.id);
    line["selected_sids"] = std::move(sids);
    line["text"] = r.text;
    line["tokens"] = r.token_count;
    line["stop_reason"] = stop_reason_name(r.stop_reason);
    line["evaluator_calls"] = r.evaluator_calls;
    out << line.dump() << "\n";
  }
}

}  // namespace ecorag
