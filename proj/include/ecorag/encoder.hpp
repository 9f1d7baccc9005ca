#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ecorag/corpus.hpp"
#include "ecorag/miner.hpp"
#include "ecorag/text.hpp"

namespace ecorag {

// Dual-encoder scorer over hashed bag-of-embeddings. Two independent weight
// tables (query side, document side); a text embeds to the mean of the rows
// its tokens hash to, and the score is the dot product of the two embeddings.
//
// Weights are stored as 32-bit floats so the on-disk format round-trips
// exactly; all arithmetic runs in double.
struct EncoderModel {
  std::size_t dim = 64;
  std::size_t bucket_count = 65536;
  std::uint64_t hash_seed = 0;
  std::vector<float> query_table;  // bucket_count * dim, row-major
  std::vector<float> doc_table;

  static EncoderModel zeros(std::size_t dim, std::size_t bucket_count,
                            std::uint64_t hash_seed);
  // Uniform init in [-scale, scale], driven by our own RNG so two runs with
  // the same seed produce bitwise-identical tables.
  static EncoderModel random_init(std::size_t dim, std::size_t bucket_count,
                                  std::uint64_t hash_seed, std::uint64_t rng_seed,
                                  double scale = 0.1);
};

// Tokenization the encoder hashes with: lowercased, punctuation splits.
// Fixed on purpose — a model file does not record a tokenizer, so every
// model must agree on one.
const TokenizerConfig& encoder_tokenizer();

// bucket -> multiplicity for the text's tokens.
std::map<std::size_t, std::size_t> hash_buckets(const EncoderModel& model,
                                                const std::string& text);

// Mean of bucket rows with multiplicity; empty text -> zero vector.
std::vector<double> embed_query(const EncoderModel& model, const std::string& text);
std::vector<double> embed_doc(const EncoderModel& model, const std::string& text);

double similarity(const EncoderModel& model, const std::string& question,
                  const std::string& sentence);

// Score one question against many sentences. The parallel and serial variants
// are bitwise-identical: each sentence's score is an independent computation.
std::vector<double> score_sentences(const EncoderModel& model, const std::string& question,
                                    std::span<const SentenceUnit> sentences);
std::vector<double> score_sentences_serial(const EncoderModel& model,
                                           const std::string& question,
                                           std::span<const SentenceUnit> sentences);

// One question's contrastive batch. strong are the targets ranked above
// everything; weak are positives against distractors but hard negatives
// against strong; distractors are negatives everywhere.
struct TrainingBatch {
  std::string question;
  std::vector<std::string> strong;
  std::vector<std::string> weak;
  std::vector<std::string> distractor;
};

// Softmax contrastive loss for one positive against a pool of negatives,
// computed with a max shift so scores up to |s| ~ 1e4 stay finite.
// No negatives -> 0.
double info_nce(double positive, std::span<const double> negatives, double tau);

// d(loss)/d(score) for [positive, negatives...]: softmax weight minus the
// positive indicator, divided by tau.
std::vector<double> info_nce_score_grads(double positive, std::span<const double> negatives,
                                         double tau);

// Weak positives vs distractor negatives, averaged over positives.
// No weak positives, or no distractors -> 0.
double loss_we(const EncoderModel& model, const TrainingBatch& batch, double tau);
// Strong positives vs weak+distractor negatives, averaged over positives.
// No strong positives, or no negatives -> 0.
double loss_se(const EncoderModel& model, const TrainingBatch& batch, double tau);
double total_loss(const EncoderModel& model, const TrainingBatch& batch, double tau);

// Sparse gradients: only buckets hashed by batch texts appear.
struct GradientTables {
  std::map<std::size_t, std::vector<double>> query;  // bucket -> d(loss)/d(row)
  std::map<std::size_t, std::vector<double>> doc;
};

// Exact analytic gradient of total_loss. The parallel variant computes the
// per-text embeddings concurrently and reduces in a fixed order, so it is
// bitwise-identical to the serial one.
GradientTables gradient(const EncoderModel& model, const TrainingBatch& batch, double tau);
GradientTables gradient_serial(const EncoderModel& model, const TrainingBatch& batch,
                               double tau);

struct TrainConfig {
  double tau = 1.0;
  double learning_rate = 1e-2;
  std::size_t epochs = 10;
  // Share of the negative pool drawn from weak sentences when building the
  // batch (the rest are distractors).
  double weak_fraction_in_se_negatives = 0.15;
  std::uint64_t seed = 0;
  enum class Optimizer { Sgd, MomentumSgd };
  Optimizer optimizer = Optimizer::Sgd;
  double momentum = 0.9;
  std::size_t positives_per_batch = 8;
  std::size_t negatives_per_batch = 56;
  // Model geometry for the freshly initialized encoder.
  std::size_t dim = 64;
  std::size_t bucket_count = 65536;
  std::uint64_t hash_seed = 0;
  double init_scale = 0.1;
};

struct TrainReport {
  std::vector<double> epoch_mean_loss;
  std::size_t trainable_questions = 0;
  std::size_t skipped_questions = 0;  // closed-book correct or no strong label
};

// Deterministic given cfg.seed: fixed shuffling, fixed batch assembly,
// single-threaded updates. Throws if no question is trainable.
EncoderModel train_encoder(const MinedDataset& mined,
                           const std::vector<QuestionRecord>& records,
                           const TrainConfig& cfg, TrainReport* report = nullptr);

// File layout: one JSON header line {"format":"ecorag-encoder-v1",dim,
// bucket_count,hash_seed}, then the query table and the doc table as raw
// little-endian 32-bit floats, row-major. Byte length validated on load.
void save_model(const EncoderModel& model, const std::string& path);
EncoderModel load_model(const std::string& path);

// Hash over geometry + both tables; lets dependents detect a mismatched model.
std::string model_fingerprint(const EncoderModel& model);

}  // namespace ecorag
