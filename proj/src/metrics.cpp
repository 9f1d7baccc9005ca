#include "ecorag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecorag/text.hpp"

namespace ecorag {

namespace {

void require_golds(const std::vector<std::string>& golds) {
  if (golds.empty()) throw std::runtime_error("golds must be nonempty");
}

}  // namespace

int exact_match(const std::string& prediction, const std::vector<std::string>& golds) {
  require_golds(golds);
  const std::string norm = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (norm == normalize_answer(g)) return 1;
  }
  return 0;
}

double f1_word(const std::string& prediction, const std::vector<std::string>& golds) {
  require_golds(golds);
  const std::vector<std::string> pred = normalized_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) {
    const std::vector<std::string> gold = normalized_tokens(g);
    if (pred.empty() && gold.empty()) {
      best = 1.0;
      break;
    }
    if (pred.empty() || gold.empty()) continue;  // this alias scores 0
    std::map<std::string, std::size_t> counts;
    for (const auto& t : gold) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : pred) {
      auto it = counts.find(t);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
    if (overlap == 0) continue;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw std::runtime_error("ndcg cutoff k must be >= 1");
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.count(ranking[i])) {
      dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, relevant.size());
  for (std::size_t i = 0; i < ideal; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i + 2));
  }
  return dcg / idcg;
}

int r20(const std::vector<SentenceUnit>& ranking, const std::vector<std::string>& golds) {
  require_golds(golds);
  std::vector<std::vector<std::string>> gold_tokens;
  for (const auto& g : golds) {
    auto toks = normalized_tokens(g);
    if (!toks.empty()) gold_tokens.push_back(std::move(toks));
  }
  const std::size_t depth = std::min<std::size_t>(20, ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    const std::vector<std::string> sent = normalized_tokens(ranking[i].text);
    for (const auto& g : gold_tokens) {
      if (contains_phrase(sent, g)) return 1;
    }
  }
  return 0;
}

RatioStats compression_ratio_stats(
    const std::vector<CompressionResult>& results,
    const std::map<std::string, std::size_t>& original_tokens) {
  RatioStats stats;
  std::vector<double> ratios;
  for (const auto& r : results) {
    auto it = original_tokens.find(r.qid);
    if (it == original_tokens.end()) {
      throw std::runtime_error("no original token count for question " + r.qid);
    }
    if (it->second == 0) {
      ++stats.excluded_zero_originals;
      continue;
    }
    ratios.push_back(static_cast<double>(r.token_count) /
                     static_cast<double>(it->second));
  }
  stats.counted = ratios.size();
  if (ratios.empty()) return stats;

  std::sort(ratios.begin(), ratios.end());
  stats.min = ratios.front();
  stats.max = ratios.back();
  stats.median = ratios[(ratios.size() - 1) / 2];
  double sum = 0.0;
  for (double r : ratios) sum += r;
  stats.mean = sum / static_cast<double>(ratios.size());
  double sq = 0.0;
  for (double r : ratios) sq += (r - stats.mean) * (r - stats.mean);
  stats.std_dev = std::sqrt(sq / static_cast<double>(ratios.size()));
  return stats;
}

}  // namespace ecorag
