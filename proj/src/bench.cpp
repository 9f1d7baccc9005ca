#include "ecorag/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ecorag/metrics.hpp"
#include "ecorag/text.hpp"

namespace ecorag {

using nlohmann::json;

std::string strategy_kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::NoCompression: return "no_compression";
    case StrategyKind::ClosedBook: return "closed_book";
    case StrategyKind::TopkTruncation: return "topk_truncation";
    case StrategyKind::Threshold: return "threshold";
    case StrategyKind::EcoragAdaptive: return "ecorag_adaptive";
  }
  return "no_compression";
}

StrategyKind strategy_kind_from_name(const std::string& name) {
  if (name == "no_compression") return StrategyKind::NoCompression;
  if (name == "closed_book") return StrategyKind::ClosedBook;
  if (name == "topk_truncation") return StrategyKind::TopkTruncation;
  if (name == "threshold") return StrategyKind::Threshold;
  if (name == "ecorag_adaptive") return StrategyKind::EcoragAdaptive;
  throw std::runtime_error("unknown strategy kind: " + name);
}

namespace {

bool needs_encoder(StrategyKind kind) {
  return kind == StrategyKind::TopkTruncation || kind == StrategyKind::Threshold ||
         kind == StrategyKind::EcoragAdaptive;
}

std::string full_document_text(const QuestionRecord& record) {
  std::string text;
  for (const auto& doc : record.documents) {
    if (!text.empty()) text += " ";
    if (doc.title && !doc.title->empty()) {
      text += *doc.title;
      text += " ";
    }
    text += doc.body;
  }
  return text;
}

std::string join_ranked_prefix(const RankedEvidence& ranked, std::size_t count) {
  std::string text;
  for (std::size_t i = 0; i < count && i < ranked.items.size(); ++i) {
    if (!text.empty()) text += " ";
    text += ranked.items[i].sentence.text;
  }
  return text;
}

}  // namespace

std::vector<EvalReport> run_benchmark(const std::vector<QuestionRecord>& records,
                                      const std::vector<StrategySpec>& strategies,
                                      Oracle& oracle, const EncoderModel* encoder,
                                      Evaluator* evaluator, const BenchOptions& options) {
  // Validate configuration before touching the oracle.
  for (const auto& spec : strategies) {
    const std::string label = spec.name.empty() ? strategy_kind_name(spec.kind) : spec.name;
    if (needs_encoder(spec.kind) && encoder == nullptr) {
      throw std::runtime_error("strategy " + label + " requires an encoder model");
    }
    if (spec.kind == StrategyKind::EcoragAdaptive && evaluator == nullptr) {
      throw std::runtime_error("strategy " + label + " requires an evaluator");
    }
    if (spec.kind == StrategyKind::TopkTruncation && spec.topk == 0) {
      throw std::runtime_error("strategy " + label + " requires topk >= 1");
    }
  }

  std::function<double()> clock = options.clock;
  if (!clock) {
    clock = [] {
      return std::chrono::duration<double>(
                 std::chrono::steady_clock::now().time_since_epoch())
          .count();
    };
  }

  std::vector<EvalReport> reports;
  reports.reserve(strategies.size());

  for (const auto& spec : strategies) {
    EvalReport report;
    report.strategy = spec.name.empty() ? strategy_kind_name(spec.kind) : spec.name;
    report.kind = spec.kind;
    report.has_ranking_metrics = needs_encoder(spec.kind);

    double r20_sum = 0.0;
    std::map<std::size_t, double> ndcg_sums;
    for (std::size_t k : options.ndcg_cutoffs) ndcg_sums[k] = 0.0;

    for (const auto& record : records) {
      QuestionResult qr;
      qr.qid = record.id;

      const double t0 = clock();
      std::optional<std::string> context;
      std::optional<RankedEvidence> ranked;
      if (needs_encoder(spec.kind)) {
        const auto sentences = question_sentences(record, options.tokenizer);
        if (!sentences.empty()) {
          ranked = rank_sentences(*encoder, record.question, sentences);
        }
      }
      switch (spec.kind) {
        case StrategyKind::NoCompression:
          context = full_document_text(record);
          break;
        case StrategyKind::ClosedBook:
          break;
        case StrategyKind::TopkTruncation:
          context = ranked ? join_ranked_prefix(*ranked, spec.topk) : "";
          break;
        case StrategyKind::Threshold: {
          std::size_t count = 0;
          if (ranked) {
            while (count < ranked->items.size() &&
                   ranked->items[count].score >= spec.threshold) {
              ++count;
            }
          }
          context = ranked ? join_ranked_prefix(*ranked, count) : "";
          break;
        }
        case StrategyKind::EcoragAdaptive: {
          if (ranked) {
            const CompressionResult result = adaptive_compress(
                record.question, *ranked, *evaluator, spec.limits, options.document_order);
            context = result.text;
            qr.tokens = result.token_count;
          } else {
            context = "";
          }
          break;
        }
      }
      if (context && spec.kind != StrategyKind::EcoragAdaptive) {
        qr.tokens = count_tokens(*context, options.tokenizer);
      }
      const double t1 = clock();
      qr.compression_seconds = t1 - t0;

      OracleRequest request;
      request.question = record.question;
      request.context = context;
      request.template_id = options.template_id;
      const AnswerAttempt attempt = oracle.generate(request);
      qr.inference_seconds = clock() - t1;

      qr.em = exact_match(attempt.raw_text, record.gold_answers);
      qr.f1 = f1_word(attempt.raw_text, record.gold_answers);

      if (ranked) {
        std::vector<std::string> ranking_ids;
        std::vector<SentenceUnit> ranking_units;
        std::set<std::string> relevant;
        ranking_ids.reserve(ranked->items.size());
        ranking_units.reserve(ranked->items.size());
        for (const auto& item : ranked->items) {
          ranking_ids.push_back(item.sentence.id);
          ranking_units.push_back(item.sentence);
        }
        for (const auto& item : ranked->items) {
          const auto sent = normalized_tokens(item.sentence.text);
          for (const auto& g : record.gold_answers) {
            const auto gold = normalized_tokens(g);
            if (!gold.empty() && contains_phrase(sent, gold)) {
              relevant.insert(item.sentence.id);
              break;
            }
          }
        }
        for (std::size_t k : options.ndcg_cutoffs) {
          ndcg_sums[k] += ndcg_at_k(ranking_ids, relevant, k);
        }
        r20_sum += static_cast<double>(r20(ranking_units, record.gold_answers));
      }

      report.compression_seconds += qr.compression_seconds;
      report.inference_seconds += qr.inference_seconds;
      report.per_question.push_back(std::move(qr));
    }

    const double n = static_cast<double>(report.per_question.size());
    if (n > 0) {
      double em_sum = 0.0, f1_sum = 0.0, token_sum = 0.0;
      for (const auto& qr : report.per_question) {
        em_sum += static_cast<double>(qr.em);
        f1_sum += qr.f1;
        token_sum += static_cast<double>(qr.tokens);
      }
      report.em_percent = 100.0 * em_sum / n;
      report.f1_percent = 100.0 * f1_sum / n;
      report.mean_tokens = token_sum / n;
      if (report.has_ranking_metrics) {
        report.r20_rate = r20_sum / n;
        for (std::size_t k : options.ndcg_cutoffs) report.ndcg[k] = ndcg_sums[k] / n;
      }
    }
    report.total_seconds = report.compression_seconds + report.inference_seconds;
    report.throughput = report.total_seconds > 0.0 ? n / report.total_seconds : 0.0;
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_json(const EvalReport& report, const std::string& path) {
  json j;
  j["strategy"] = report.strategy;
  j["kind"] = strategy_kind_name(report.kind);
  j["questions"] = report.per_question.size();
  j["em"] = report.em_percent;
  j["f1"] = report.f1_percent;
  j["mean_tokens"] = report.mean_tokens;
  if (report.has_ranking_metrics) {
    j["r20"] = report.r20_rate;
    json ndcg = json::object();
    for (const auto& [k, v] : report.ndcg) ndcg[std::to_string(k)] = v;
    j["ndcg"] = std::move(ndcg);
  } else {
    j["r20"] = nullptr;
    j["ndcg"] = nullptr;
  }
  j["timing"] = {{"compression_seconds", report.compression_seconds},
                 {"inference_seconds", report.inference_seconds},
                 {"total_seconds", report.total_seconds},
                 {"throughput", report.throughput}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  out << j.dump(2) << "\n";
}

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  out << "qid,em,f1,tokens,compression_seconds,inference_seconds\n";
  for (const auto& qr : report.per_question) {
    out << qr.qid << "," << qr.em << "," << fixed(qr.f1, 6) << "," << qr.tokens << ","
        << fixed(qr.compression_seconds, 6) << "," << fixed(qr.inference_seconds, 6)
        << "\n";
  }
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  std::vector<std::size_t> cutoffs;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.ndcg) {
      if (std::find(cutoffs.begin(), cutoffs.end(), k) == cutoffs.end()) {
        cutoffs.push_back(k);
      }
    }
  }
  std::sort(cutoffs.begin(), cutoffs.end());

  std::vector<std::string> headers = {"strategy", "EM", "F1", "tokens", "R20"};
  for (std::size_t k : cutoffs) headers.push_back("NDCG@" + std::to_string(k));
  headers.push_back("comp(s)");
  headers.push_back("inf(s)");
  headers.push_back("total(s)");
  headers.push_back("q/s");

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::vector<std::string> row;
    row.push_back(r.strategy);
    row.push_back(fixed(r.em_percent, 2));
    row.push_back(fixed(r.f1_percent, 2));
    row.push_back(fixed(r.mean_tokens, 1));
    row.push_back(r.has_ranking_metrics ? fixed(r.r20_rate, 3) : "-");
    for (std::size_t k : cutoffs) {
      auto it = r.ndcg.find(k);
      row.push_back(it != r.ndcg.end() ? fixed(it->second, 3) : "-");
    }
    row.push_back(fixed(r.compression_seconds, 3));
    row.push_back(fixed(r.inference_seconds, 3));
    row.push_back(fixed(r.total_seconds, 3));
    row.push_back(fixed(r.throughput, 1));
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }

  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      out << cells[c];
      if (c + 1 < cells.size()) {
        for (std::size_t pad = cells[c].size(); pad < widths[c]; ++pad) out << ' ';
      }
    }
    out << "\n";
  };
  emit_row(headers);
  std::vector<std::string> rule;
  for (std::size_t c = 0; c < headers.size(); ++c) rule.push_back(std::string(widths[c], '-'));
  emit_row(rule);
  for (const auto& row : rows) emit_row(row);
  return out.str();
}

void write_comparison_table(const std::vector<EvalReport>& reports,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write comparison table to " + path);
  out << comparison_table(reports);
}

}  // namespace ecorag
