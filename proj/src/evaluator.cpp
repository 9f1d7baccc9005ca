#include "ecorag/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "ecorag/util.hpp"

namespace ecorag {

using nlohmann::json;

namespace {

constexpr const char* kEvalFormat = "ecorag-eval-v1";

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace

std::string verdict_name(Verdict v) { return v == Verdict::Evi ? "EVI" : "NOT"; }

std::vector<double> evaluator_features(const EncoderModel& encoder,
                                       const std::string& question,
                                       const std::string& text) {
  const std::vector<double> q = embed_query(encoder, question);
  const std::vector<double> d = embed_doc(encoder, text);
  std::vector<double> f;
  f.reserve(3 * encoder.dim + 2);
  f.insert(f.end(), q.begin(), q.end());
  f.insert(f.end(), d.begin(), d.end());
  double sim = 0.0;
  for (std::size_t k = 0; k < encoder.dim; ++k) {
    f.push_back(q[k] * d[k]);
    sim += q[k] * d[k];
  }
  f.push_back(sim);
  f.push_back(std::log1p(static_cast<double>(count_tokens(text, encoder_tokenizer()))));
  return f;
}

std::size_t evaluator_feature_dim(const EncoderModel& encoder) {
  return 3 * encoder.dim + 2;
}

double evaluator_probability(const EvaluatorClassifier& clf,
                             const std::vector<double>& features) {
  if (features.size() != clf.feature_dim) {
    throw std::runtime_error("evaluator feature dimension mismatch");
  }
  double z = static_cast<double>(clf.bias);
  for (std::size_t k = 0; k < features.size(); ++k) {
    z += static_cast<double>(clf.weights[k]) * features[k];
  }
  return sigmoid(z);
}

ClassifierEvaluator::ClassifierEvaluator(const EvaluatorClassifier& clf,
                                         const EncoderModel& encoder)
    : clf_(&clf), encoder_(&encoder) {
  if (clf.feature_dim != evaluator_feature_dim(encoder)) {
    throw std::runtime_error("evaluator classifier does not fit this encoder");
  }
  const std::string fp = model_fingerprint(encoder);
  if (!clf.encoder_fingerprint.empty() && clf.encoder_fingerprint != fp) {
    throw std::runtime_error("evaluator classifier was trained on a different encoder");
  }
}

Verdict ClassifierEvaluator::assess(const std::string& question,
                                    const std::string& compressed) {
  const double p =
      evaluator_probability(*clf_, evaluator_features(*encoder_, question, compressed));
  return p >= 0.5 ? Verdict::Evi : Verdict::Not;
}

OracleEvaluator::OracleEvaluator(Oracle& oracle,
                                 std::map<std::string, std::vector<std::string>> golds,
                                 MatchMode match, std::string template_id)
    : oracle_(&oracle),
      golds_(std::move(golds)),
      match_(match),
      template_id_(std::move(template_id)) {}

Verdict OracleEvaluator::assess(const std::string& question,
                                const std::string& compressed) {
  auto it = golds_.find(question);
  if (it == golds_.end()) {
    throw std::runtime_error("no gold answers registered for question: " + question);
  }
  OracleRequest req;
  req.question = question;
  req.context = compressed;
  req.template_id = template_id_;
  return is_correct(oracle_->generate(req), it->second, match_) ? Verdict::Evi
                                                                : Verdict::Not;
}

ThresholdEvaluator::ThresholdEvaluator(const EncoderModel& encoder, double threshold)
    : encoder_(&encoder), threshold_(threshold) {}

Verdict ThresholdEvaluator::assess(const std::string& question,
                                   const std::string& compressed) {
  const std::vector<double> q = embed_query(*encoder_, question);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& span : split_sentences(compressed, "ctx", TokenizerConfig{})) {
    const std::vector<double> d = embed_doc(*encoder_, span.text);
    double sim = 0.0;
    for (std::size_t k = 0; k < encoder_->dim; ++k) sim += q[k] * d[k];
    best = std::max(best, sim);
  }
  return best >= threshold_ ? Verdict::Evi : Verdict::Not;
}

EvaluatorTrainSet build_trainset(const MinedDataset& mined,
                                 const std::vector<QuestionRecord>& records,
                                 const EncoderModel& encoder,
                                 const TrainsetOptions& options) {
  std::map<std::string, const QuestionRecord*> by_qid;
  for (const auto& r : records) by_qid[r.id] = &r;

  EvaluatorTrainSet out;
  out.ratio = options.ratio;

  struct ScoredNegative {
    double score;
    EvaluatorExample example;
  };
  std::vector<ScoredNegative> candidates;
  const TokenizerConfig split_cfg{};

  for (const auto& mq : mined.questions) {
    auto it = by_qid.find(mq.qid);
    if (it == by_qid.end()) {
      throw std::runtime_error("mined question not present in dataset: " + mq.qid);
    }
    const QuestionRecord& record = *it->second;
    std::map<std::string, std::string> text_by_sid;
    for (const auto& s : question_sentences(record, split_cfg)) {
      text_by_sid[s.id] = s.text;
    }
    std::vector<std::string> strong_texts;
    std::vector<std::string> other_texts;
    for (const auto& e : mq.entries) {
      auto ts = text_by_sid.find(e.sid);
      if (ts == text_by_sid.end()) {
        throw std::runtime_error("mined sentence id not found in dataset: " + e.sid);
      }
      if (e.label == EvidentialityLabel::Strong) {
        out.positives.push_back({mq.qid, e.sid, record.question, ts->second});
        strong_texts.push_back(ts->second);
      } else if (e.label == EvidentialityLabel::Weak ||
                 e.label == EvidentialityLabel::Distractor) {
        candidates.push_back({similarity(encoder, record.question, ts->second),
                              {mq.qid, e.sid, record.question, ts->second}});
        other_texts.push_back(ts->second);
      }
    }
    if (options.augment_concatenated && !strong_texts.empty()) {
      std::string pos;
      for (const auto& t : strong_texts) {
        if (!pos.empty()) pos += " ";
        pos += t;
      }
      out.positives.push_back({mq.qid, "concat+", record.question, pos});
      if (!other_texts.empty()) {
        std::string neg;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, other_texts.size()); ++i) {
          if (!neg.empty()) neg += " ";
          neg += other_texts[i];
        }
        candidates.push_back({similarity(encoder, record.question, neg),
                              {mq.qid, "concat-", record.question, neg}});
      }
    }
  }

  if (out.positives.empty()) {
    throw std::runtime_error("cannot build evaluator trainset: no STRONG sentences");
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const ScoredNegative& a, const ScoredNegative& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.example.qid != b.example.qid) return a.example.qid < b.example.qid;
              return a.example.sid < b.example.sid;
            });
  const std::size_t want = options.ratio * out.positives.size();
  const std::size_t take = std::min(want, candidates.size());
  out.shortfall = take < want;
  out.negatives.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.negatives.push_back(candidates[i].example);
  return out;
}

double evaluator_loss(const EvaluatorClassifier& clf,
                      const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels) {
  if (features.size() != labels.size()) {
    throw std::runtime_error("evaluator loss: features/labels size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double z = static_cast<double>(clf.bias);
    for (std::size_t k = 0; k < features[i].size(); ++k) {
      z += static_cast<double>(clf.weights[k]) * features[i][k];
    }
    // -log p(label): softplus(-z) for label 1, softplus(z) for label 0.
    total += labels[i] == 1 ? softplus(-z) : softplus(z);
  }
  return total / static_cast<double>(features.size());
}

void evaluator_loss_grad(const EvaluatorClassifier& clf,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, std::vector<double>* dw,
                         double* db) {
  dw->assign(clf.feature_dim, 0.0);
  *db = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double z = static_cast<double>(clf.bias);
    for (std::size_t k = 0; k < features[i].size(); ++k) {
      z += static_cast<double>(clf.weights[k]) * features[i][k];
    }
    const double delta = sigmoid(z) - static_cast<double>(labels[i]);
    for (std::size_t k = 0; k < features[i].size(); ++k) {
      (*dw)[k] += delta * features[i][k];
    }
    *db += delta;
  }
  const double inv = 1.0 / static_cast<double>(features.size());
  for (auto& g : *dw) g *= inv;
  *db *= inv;
}

EvaluatorClassifier train_evaluator(const EvaluatorTrainSet& trainset,
                                    const EncoderModel& encoder,
                                    const EvaluatorTrainConfig& cfg,
                                    EvaluatorTrainReport* report) {
  if (trainset.positives.empty() || trainset.negatives.empty()) {
    throw std::runtime_error("evaluator trainset must contain both verdict classes");
  }

  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  features.reserve(trainset.positives.size() + trainset.negatives.size());
  for (const auto& ex : trainset.positives) {
    features.push_back(evaluator_features(encoder, ex.question, ex.text));
    labels.push_back(1);
  }
  for (const auto& ex : trainset.negatives) {
    features.push_back(evaluator_features(encoder, ex.question, ex.text));
    labels.push_back(0);
  }

  EvaluatorClassifier clf;
  clf.feature_dim = evaluator_feature_dim(encoder);
  clf.weights.assign(clf.feature_dim, 0.0f);
  clf.bias = 0.0f;
  clf.encoder_fingerprint = model_fingerprint(encoder);

  if (report) report->epoch_loss.clear();
  std::vector<double> dw;
  double db = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (report) report->epoch_loss.push_back(evaluator_loss(clf, features, labels));
    evaluator_loss_grad(clf, features, labels, &dw, &db);
    for (std::size_t k = 0; k < clf.feature_dim; ++k) {
      clf.weights[k] = static_cast<float>(static_cast<double>(clf.weights[k]) -
                                          cfg.learning_rate * dw[k]);
    }
    clf.bias =
        static_cast<float>(static_cast<double>(clf.bias) - cfg.learning_rate * db);
  }
  return clf;
}

namespace {

void write_f32_le_bytes(std::ostream& out, const float* values, std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &values[i], 4);
    buf[4 * i + 0] = static_cast<unsigned char>(bits & 0xff);
    buf[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    buf[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    buf[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

float read_f32_le_at(const unsigned char* bytes, std::size_t i) {
  std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i + 0]) |
                       (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                       (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                       (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_evaluator(const EvaluatorClassifier& clf, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write evaluator to " + path);
  json header;
  header["format"] = kEvalFormat;
  header["feature_dim"] = clf.feature_dim;
  header["encoder_fingerprint"] = clf.encoder_fingerprint;
  out << header.dump() << "\n";
  write_f32_le_bytes(out, clf.weights.data(), clf.weights.size());
  write_f32_le_bytes(out, &clf.bias, 1);
  if (!out) throw std::runtime_error("write failed for evaluator " + path);
}

EvaluatorClassifier load_evaluator(const std::string& path,
                                   const std::string& expected_encoder_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open evaluator file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("evaluator file is empty: " + path);
  }
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("evaluator header is not valid JSON: ") +
                             e.what());
  }
  const std::string format = header.at("format").get<std::string>();
  if (format != kEvalFormat) {
    throw std::runtime_error("unsupported evaluator format: " + format);
  }
  EvaluatorClassifier clf;
  clf.feature_dim = header.at("feature_dim").get<std::size_t>();
  clf.encoder_fingerprint = header.at("encoder_fingerprint").get<std::string>();
  if (!expected_encoder_fingerprint.empty() &&
      clf.encoder_fingerprint != expected_encoder_fingerprint) {
    throw std::runtime_error("evaluator was trained on a different encoder (fingerprint " +
                             clf.encoder_fingerprint + ", expected " +
                             expected_encoder_fingerprint + ")");
  }

  std::vector<unsigned char> payload(std::istreambuf_iterator<char>(in), {});
  const std::size_t expected = (clf.feature_dim + 1) * 4;
  if (payload.size() < expected) {
    throw std::runtime_error("evaluator file truncated: " + path);
  }
  if (payload.size() > expected) {
    throw std::runtime_error("evaluator file has trailing data: " + path);
  }
  clf.weights.resize(clf.feature_dim);
  for (std::size_t i = 0; i < clf.feature_dim; ++i) {
    clf.weights[i] = read_f32_le_at(payload.data(), i);
  }
  clf.bias = read_f32_le_at(payload.data(), clf.feature_dim);
  return clf;
}

}  // namespace ecorag
