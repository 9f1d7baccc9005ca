#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ecorag/compressor.hpp"
#include "ecorag/corpus.hpp"

namespace ecorag {

// 1 iff the normalized prediction equals any normalized gold alias.
int exact_match(const std::string& prediction, const std::vector<std::string>& golds);

// Max over gold aliases of token-multiset F1 after normalization. Both sides
// empty after normalization -> 1; exactly one side empty -> 0.
double f1_word(const std::string& prediction, const std::vector<std::string>& golds);

// Binary-gain DCG at rank cutoff k with discount 1/log2(rank+1), divided by
// the ideal DCG. Empty relevant set -> 0 by convention (callers that care
// should count those cases themselves).
double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::set<std::string>& relevant, std::size_t k);

// 1 iff any of the top-20 ranked sentences contains some normalized gold
// alias as a contiguous token phrase.
int r20(const std::vector<SentenceUnit>& ranking, const std::vector<std::string>& golds);

struct RatioStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;  // lower middle for even counts
  double std_dev = 0.0;  // population standard deviation
  std::size_t counted = 0;
  std::size_t excluded_zero_originals = 0;
};

// Per-question compressed/original token ratios, then the five aggregates.
// Questions whose original context has zero tokens are excluded and counted.
RatioStats compression_ratio_stats(const std::vector<CompressionResult>& results,
                                   const std::map<std::string, std::size_t>& original_tokens);

}  // namespace ecorag
