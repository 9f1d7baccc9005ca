// Compares the OpenMP-parallel scoring and gradient kernels against their
// serial reference implementations across corpus sizes.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ecorag/encoder.hpp"
#include "ecorag/util.hpp"

namespace {

using ecorag::EncoderModel;
using ecorag::SentenceUnit;
using ecorag::SplitMix64;
using ecorag::TrainingBatch;

std::string random_sentence(SplitMix64& rng, std::size_t words) {
  static const char* kWords[] = {"alpha", "bridge", "carbon", "delta",  "ember",
                                 "forest", "glacier", "harbor", "island", "jungle",
                                 "keel",  "lumen",  "meadow", "north",  "onyx",
                                 "prism", "quartz", "river",  "summit", "tundra"};
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += kWords[rng.next_below(std::size(kWords))];
  }
  return out;
}

std::vector<SentenceUnit> make_sentences(std::size_t count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<SentenceUnit> sentences;
  sentences.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SentenceUnit s;
    s.id = "d#" + std::to_string(i);
    s.doc_id = "d";
    s.text = random_sentence(rng, 8 + rng.next_below(12));
    s.token_count = 0;
    sentences.push_back(std::move(s));
  }
  return sentences;
}

EncoderModel make_model() { return EncoderModel::random_init(64, 65536, 0, 42, 0.1); }

void BM_ScoreParallel(benchmark::State& state) {
  const EncoderModel model = make_model();
  const auto sentences = make_sentences(static_cast<std::size_t>(state.range(0)), 7);
  const std::string question = "which river reaches the summit beyond the glacier";
  for (auto _ : state) {
    auto scores = ecorag::score_sentences(model, question, sentences);
    benchmark::DoNotOptimize(scores);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreSerial(benchmark::State& state) {
  const EncoderModel model = make_model();
  const auto sentences = make_sentences(static_cast<std::size_t>(state.range(0)), 7);
  const std::string question = "which river reaches the summit beyond the glacier";
  for (auto _ : state) {
    auto scores = ecorag::score_sentences_serial(model, question, sentences);
    benchmark::DoNotOptimize(scores);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

TrainingBatch make_batch(std::size_t per_bucket) {
  SplitMix64 rng(11);
  TrainingBatch batch;
  batch.question = "which river reaches the summit beyond the glacier";
  for (std::size_t i = 0; i < per_bucket; ++i) {
    batch.strong.push_back(random_sentence(rng, 12));
    batch.weak.push_back(random_sentence(rng, 12));
    batch.distractor.push_back(random_sentence(rng, 12));
    batch.distractor.push_back(random_sentence(rng, 12));
  }
  return batch;
}

void BM_GradientParallel(benchmark::State& state) {
  const EncoderModel model = make_model();
  const TrainingBatch batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto grads = ecorag::gradient(model, batch, 1.0);
    benchmark::DoNotOptimize(grads);
  }
}

void BM_GradientSerial(benchmark::State& state) {
  const EncoderModel model = make_model();
  const TrainingBatch batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto grads = ecorag::gradient_serial(model, batch, 1.0);
    benchmark::DoNotOptimize(grads);
  }
}

}  // namespace

BENCHMARK(BM_ScoreParallel)->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(BM_ScoreSerial)->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(BM_GradientParallel)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(BM_GradientSerial)->Arg(4)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
