#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ecorag/encoder.hpp"
#include "ecorag/miner.hpp"
#include "ecorag/oracle.hpp"

namespace ecorag {

// Binary judgement: is this compressed context sufficient evidence?
enum class Verdict { Evi, Not };

std::string verdict_name(Verdict v);

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Verdict assess(const std::string& question, const std::string& compressed) = 0;
};

// Test/scripting adapter around a plain function.
class FunctionEvaluator : public Evaluator {
 public:
  explicit FunctionEvaluator(
      std::function<Verdict(const std::string&, const std::string&)> fn)
      : fn_(std::move(fn)) {}
  Verdict assess(const std::string& question, const std::string& compressed) override {
    return fn_(question, compressed);
  }

 private:
  std::function<Verdict(const std::string&, const std::string&)> fn_;
};

// Feature recipe over the dual encoder: [query embedding, doc embedding,
// elementwise product, similarity score, log1p(token count)].
// Dimension 3*dim + 2.
std::vector<double> evaluator_features(const EncoderModel& encoder,
                                       const std::string& question,
                                       const std::string& text);
std::size_t evaluator_feature_dim(const EncoderModel& encoder);

// Logistic head over evaluator_features. Weights are float so the on-disk
// format round-trips exactly; math runs in double. EVI iff
// sigmoid(w·features + bias) >= 0.5.
struct EvaluatorClassifier {
  std::size_t feature_dim = 0;
  std::vector<float> weights;
  float bias = 0.0f;
  std::string encoder_fingerprint;  // the encoder the features came from
};

double evaluator_probability(const EvaluatorClassifier& clf,
                             const std::vector<double>& features);

class ClassifierEvaluator : public Evaluator {
 public:
  // Both referents must outlive the evaluator.
  ClassifierEvaluator(const EvaluatorClassifier& clf, const EncoderModel& encoder);
  Verdict assess(const std::string& question, const std::string& compressed) override;

 private:
  const EvaluatorClassifier* clf_;
  const EncoderModel* encoder_;
};

// EVI iff the answer generated over the compressed context is correct.
class OracleEvaluator : public Evaluator {
 public:
  OracleEvaluator(Oracle& oracle, std::map<std::string, std::vector<std::string>> golds,
                  MatchMode match = MatchMode::Containment,
                  std::string template_id = "qa-fewshot-v1");
  // Questions absent from the gold map are an error: the verdict would be
  // meaningless.
  Verdict assess(const std::string& question, const std::string& compressed) override;

 private:
  Oracle* oracle_;
  std::map<std::string, std::vector<std::string>> golds_;  // question -> answers
  MatchMode match_;
  std::string template_id_;
};

// EVI iff the best per-sentence similarity inside the compressed text reaches
// the threshold.
class ThresholdEvaluator : public Evaluator {
 public:
  ThresholdEvaluator(const EncoderModel& encoder, double threshold);
  Verdict assess(const std::string& question, const std::string& compressed) override;

 private:
  const EncoderModel* encoder_;
  double threshold_;
};

struct EvaluatorExample {
  std::string qid;
  std::string sid;
  std::string question;
  std::string text;
};

struct EvaluatorTrainSet {
  std::vector<EvaluatorExample> positives;  // strong sentences
  std::vector<EvaluatorExample> negatives;  // weak/distractor, highest-scoring first
  std::size_t ratio = 3;                    // requested negatives per positive
  bool shortfall = false;                   // fewer negatives available than requested
};

struct TrainsetOptions {
  std::size_t ratio = 3;
  // When set, each question also contributes one concatenated positive (its
  // strong sentences joined) and one concatenated negative (up to three
  // non-strong sentences joined), approximating what assessment sees at
  // inference time. Off by default.
  bool augment_concatenated = false;
};

// Positives are every STRONG sentence; negatives are the WEAK/DISTRACTOR
// sentences with the highest similarity under the encoder, downsampled to
// ratio * |positives| (all of them, with shortfall flagged, if fewer exist).
// Ties broken by (qid, sid) so the result is deterministic.
EvaluatorTrainSet build_trainset(const MinedDataset& mined,
                                 const std::vector<QuestionRecord>& records,
                                 const EncoderModel& encoder,
                                 const TrainsetOptions& options = {});

struct EvaluatorTrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

struct EvaluatorTrainReport {
  std::vector<double> epoch_loss;  // full-batch cross-entropy per epoch
};

// Full-batch gradient descent on binary cross-entropy from zero weights.
// Deterministic; throws if either side of the trainset is empty.
EvaluatorClassifier train_evaluator(const EvaluatorTrainSet& trainset,
                                    const EncoderModel& encoder,
                                    const EvaluatorTrainConfig& cfg,
                                    EvaluatorTrainReport* report = nullptr);

// Cross-entropy loss and its analytic gradient at the feature level, exposed
// for finite-difference verification.
double evaluator_loss(const EvaluatorClassifier& clf,
                      const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels);
void evaluator_loss_grad(const EvaluatorClassifier& clf,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, std::vector<double>* dw,
                         double* db);

// File layout: one JSON header line {"format":"ecorag-eval-v1",feature_dim,
// encoder_fingerprint}, then feature_dim weights and the bias as raw
// little-endian 32-bit floats. Loading validates the byte length and, when a
// fingerprint is supplied, that it matches the file.
void save_evaluator(const EvaluatorClassifier& clf, const std::string& path);
EvaluatorClassifier load_evaluator(const std::string& path,
                                   const std::string& expected_encoder_fingerprint = "");

}  // namespace ecorag
