#include "ecorag/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ecorag/util.hpp"

namespace ecorag {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "ecorag-encoder-v1";

void check_geometry(std::size_t dim, std::size_t bucket_count) {
  if (dim == 0) throw std::runtime_error("encoder dim must be positive");
  if (bucket_count == 0) throw std::runtime_error("encoder bucket_count must be positive");
}

// Token buckets plus the doc/query-side embedding for one text, computed once
// and reused across the loss terms that mention the text.
struct TextFeatures {
  std::map<std::size_t, std::size_t> buckets;  // bucket -> multiplicity
  std::vector<double> embed;
  std::size_t tokens = 0;
};

TextFeatures featurize(const EncoderModel& model, const std::vector<float>& table,
                       const std::string& text) {
  TextFeatures f;
  f.embed.assign(model.dim, 0.0);
  for (const auto& tok : tokenize(text, encoder_tokenizer())) {
    ++f.buckets[fnv1a64(tok, model.hash_seed) % model.bucket_count];
    ++f.tokens;
  }
  if (f.tokens == 0) return f;
  for (const auto& [bucket, mult] : f.buckets) {
    const float* row = table.data() + bucket * model.dim;
    for (std::size_t k = 0; k < model.dim; ++k) {
      f.embed[k] += static_cast<double>(mult) * static_cast<double>(row[k]);
    }
  }
  for (auto& v : f.embed) v /= static_cast<double>(f.tokens);
  return f;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

EncoderModel EncoderModel::zeros(std::size_t dim, std::size_t bucket_count,
                                 std::uint64_t hash_seed) {
  check_geometry(dim, bucket_count);
  EncoderModel m;
  m.dim = dim;
  m.bucket_count = bucket_count;
  m.hash_seed = hash_seed;
  m.query_table.assign(bucket_count * dim, 0.0f);
  m.doc_table.assign(bucket_count * dim, 0.0f);
  return m;
}

EncoderModel EncoderModel::random_init(std::size_t dim, std::size_t bucket_count,
                                       std::uint64_t hash_seed, std::uint64_t rng_seed,
                                       double scale) {
  EncoderModel m = zeros(dim, bucket_count, hash_seed);
  SplitMix64 rng(rng_seed);
  for (auto& w : m.query_table) {
    w = static_cast<float>(scale * (2.0 * rng.next_unit() - 1.0));
  }
  for (auto& w : m.doc_table) {
    w = static_cast<float>(scale * (2.0 * rng.next_unit() - 1.0));
  }
  return m;
}

const TokenizerConfig& encoder_tokenizer() {
  static const TokenizerConfig cfg{TokenizerMode::WhitespacePunct, true};
  return cfg;
}

std::map<std::size_t, std::size_t> hash_buckets(const EncoderModel& model,
                                                const std::string& text) {
  std::map<std::size_t, std::size_t> buckets;
  for (const auto& tok : tokenize(text, encoder_tokenizer())) {
    ++buckets[fnv1a64(tok, model.hash_seed) % model.bucket_count];
  }
  return buckets;
}

std::vector<double> embed_query(const EncoderModel& model, const std::string& text) {
  return featurize(model, model.query_table, text).embed;
}

std::vector<double> embed_doc(const EncoderModel& model, const std::string& text) {
  return featurize(model, model.doc_table, text).embed;
}

double similarity(const EncoderModel& model, const std::string& question,
                  const std::string& sentence) {
  return dot(embed_query(model, question), embed_doc(model, sentence));
}

namespace {

std::vector<double> score_sentences_impl(const EncoderModel& model,
                                         const std::string& question,
                                         std::span<const SentenceUnit> sentences,
                                         bool parallel) {
  const std::vector<double> q = embed_query(model, question);
  std::vector<double> scores(sentences.size(), 0.0);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      scores[i] = dot(q, embed_doc(model, sentences[i].text));
    }
  } else {
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      scores[i] = dot(q, embed_doc(model, sentences[i].text));
    }
  }
  return scores;
}

}  // namespace

std::vector<double> score_sentences(const EncoderModel& model, const std::string& question,
                                    std::span<const SentenceUnit> sentences) {
  return score_sentences_impl(model, question, sentences, true);
}

std::vector<double> score_sentences_serial(const EncoderModel& model,
                                           const std::string& question,
                                           std::span<const SentenceUnit> sentences) {
  return score_sentences_impl(model, question, sentences, false);
}

double info_nce(double positive, std::span<const double> negatives, double tau) {
  if (negatives.empty()) return 0.0;
  double m = positive;
  for (double s : negatives) m = std::max(m, s);
  double denom = std::exp((positive - m) / tau);
  for (double s : negatives) denom += std::exp((s - m) / tau);
  return std::log(denom) - (positive - m) / tau;
}

std::vector<double> info_nce_score_grads(double positive, std::span<const double> negatives,
                                         double tau) {
  std::vector<double> grads(1 + negatives.size(), 0.0);
  if (negatives.empty()) return grads;  // loss is constant 0
  double m = positive;
  for (double s : negatives) m = std::max(m, s);
  double denom = std::exp((positive - m) / tau);
  for (double s : negatives) denom += std::exp((s - m) / tau);
  grads[0] = (std::exp((positive - m) / tau) / denom - 1.0) / tau;
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    grads[1 + j] = (std::exp((negatives[j] - m) / tau) / denom) / tau;
  }
  return grads;
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw std::runtime_error("tau must be positive");
}

std::vector<double> text_scores(const EncoderModel& model, const std::vector<double>& q,
                                const std::vector<std::string>& texts) {
  std::vector<double> scores(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    scores[i] = dot(q, embed_doc(model, texts[i]));
  }
  return scores;
}

}  // namespace

double loss_we(const EncoderModel& model, const TrainingBatch& batch, double tau) {
  check_tau(tau);
  if (batch.weak.empty() || batch.distractor.empty()) return 0.0;
  const std::vector<double> q = embed_query(model, batch.question);
  const std::vector<double> weak = text_scores(model, q, batch.weak);
  const std::vector<double> dis = text_scores(model, q, batch.distractor);
  double total = 0.0;
  for (double s : weak) total += info_nce(s, dis, tau);
  return total / static_cast<double>(weak.size());
}

double loss_se(const EncoderModel& model, const TrainingBatch& batch, double tau) {
  check_tau(tau);
  if (batch.strong.empty()) return 0.0;
  if (batch.weak.empty() && batch.distractor.empty()) return 0.0;
  const std::vector<double> q = embed_query(model, batch.question);
  const std::vector<double> strong = text_scores(model, q, batch.strong);
  std::vector<double> negs = text_scores(model, q, batch.weak);
  for (double s : text_scores(model, q, batch.distractor)) negs.push_back(s);
  double total = 0.0;
  for (double s : strong) total += info_nce(s, negs, tau);
  return total / static_cast<double>(strong.size());
}

double total_loss(const EncoderModel& model, const TrainingBatch& batch, double tau) {
  return loss_se(model, batch, tau) + loss_we(model, batch, tau);
}

namespace {

GradientTables gradient_impl(const EncoderModel& model, const TrainingBatch& batch,
                             double tau, bool parallel) {
  check_tau(tau);
  const std::size_t S = batch.strong.size();
  const std::size_t W = batch.weak.size();
  const std::size_t D = batch.distractor.size();

  std::vector<const std::string*> texts;
  texts.reserve(S + W + D);
  for (const auto& t : batch.strong) texts.push_back(&t);
  for (const auto& t : batch.weak) texts.push_back(&t);
  for (const auto& t : batch.distractor) texts.push_back(&t);

  const TextFeatures qf = featurize(model, model.query_table, batch.question);

  std::vector<TextFeatures> feats(texts.size());
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < texts.size(); ++i) {
      feats[i] = featurize(model, model.doc_table, *texts[i]);
    }
  } else {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      feats[i] = featurize(model, model.doc_table, *texts[i]);
    }
  }

  std::vector<double> scores(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) scores[i] = dot(qf.embed, feats[i].embed);

  // coeff[i] accumulates d(total_loss)/d(score_i) across both loss terms.
  std::vector<double> coeff(texts.size(), 0.0);

  if (W > 0 && D > 0) {
    std::vector<double> dis_scores(scores.begin() + S + W, scores.end());
    const double inv = 1.0 / static_cast<double>(W);
    for (std::size_t w = 0; w < W; ++w) {
      const auto g = info_nce_score_grads(scores[S + w], dis_scores, tau);
      coeff[S + w] += inv * g[0];
      for (std::size_t j = 0; j < D; ++j) coeff[S + W + j] += inv * g[1 + j];
    }
  }
  if (S > 0 && W + D > 0) {
    std::vector<double> neg_scores(scores.begin() + S, scores.end());
    const double inv = 1.0 / static_cast<double>(S);
    for (std::size_t s = 0; s < S; ++s) {
      const auto g = info_nce_score_grads(scores[s], neg_scores, tau);
      coeff[s] += inv * g[0];
      for (std::size_t j = 0; j < W + D; ++j) coeff[S + j] += inv * g[1 + j];
    }
  }

  GradientTables out;
  // d(score_i)/d(doc_row b) = (mult/tokens) * q_embed, scaled by coeff[i].
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (coeff[i] == 0.0 || feats[i].tokens == 0) continue;
    for (const auto& [bucket, mult] : feats[i].buckets) {
      auto& row = out.doc[bucket];
      if (row.empty()) row.assign(model.dim, 0.0);
      const double w = coeff[i] * static_cast<double>(mult) /
                       static_cast<double>(feats[i].tokens);
      for (std::size_t k = 0; k < model.dim; ++k) row[k] += w * qf.embed[k];
    }
  }
  // d(score_i)/d(query_row b) = (mult/tokens) * doc_embed_i; sum over i first.
  if (qf.tokens > 0) {
    std::vector<double> v(model.dim, 0.0);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (coeff[i] == 0.0) continue;
      for (std::size_t k = 0; k < model.dim; ++k) v[k] += coeff[i] * feats[i].embed[k];
    }
    for (const auto& [bucket, mult] : qf.buckets) {
      auto& row = out.query[bucket];
      if (row.empty()) row.assign(model.dim, 0.0);
      const double w = static_cast<double>(mult) / static_cast<double>(qf.tokens);
      for (std::size_t k = 0; k < model.dim; ++k) row[k] += w * v[k];
    }
  }
  return out;
}

}  // namespace

GradientTables gradient(const EncoderModel& model, const TrainingBatch& batch, double tau) {
  return gradient_impl(model, batch, tau, true);
}

GradientTables gradient_serial(const EncoderModel& model, const TrainingBatch& batch,
                               double tau) {
  return gradient_impl(model, batch, tau, false);
}

namespace {

struct QuestionPools {
  std::string question;
  std::vector<std::string> strong;
  std::vector<std::string> weak;
  std::vector<std::string> distractor;
};

// Shuffle-and-take-first-k selection so repeated epochs see different subsets
// while staying reproducible.
std::vector<std::string> sample_texts(const std::vector<std::string>& pool, std::size_t k,
                                      SplitMix64& rng) {
  if (pool.size() <= k) return pool;
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[idx[i]]);
  return out;
}

void apply_sparse_sgd(std::vector<float>& table, std::size_t dim,
                      const std::map<std::size_t, std::vector<double>>& grad, double lr) {
  for (const auto& [bucket, g] : grad) {
    float* row = table.data() + bucket * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      row[k] = static_cast<float>(static_cast<double>(row[k]) - lr * g[k]);
    }
  }
}

void apply_momentum(std::vector<float>& table, std::vector<double>& velocity,
                    std::size_t dim, const std::map<std::size_t, std::vector<double>>& grad,
                    double lr, double mu) {
  for (auto& v : velocity) v *= mu;
  for (const auto& [bucket, g] : grad) {
    double* vrow = velocity.data() + bucket * dim;
    for (std::size_t k = 0; k < dim; ++k) vrow[k] -= lr * g[k];
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    table[i] = static_cast<float>(static_cast<double>(table[i]) + velocity[i]);
  }
}

}  // namespace

EncoderModel train_encoder(const MinedDataset& mined,
                           const std::vector<QuestionRecord>& records,
                           const TrainConfig& cfg, TrainReport* report) {
  check_tau(cfg.tau);
  check_geometry(cfg.dim, cfg.bucket_count);

  std::map<std::string, const QuestionRecord*> by_qid;
  for (const auto& r : records) by_qid[r.id] = &r;

  std::vector<QuestionPools> pools;
  std::size_t skipped = 0;
  const TokenizerConfig split_cfg{};
  for (const auto& mq : mined.questions) {
    auto it = by_qid.find(mq.qid);
    if (it == by_qid.end()) {
      throw std::runtime_error("mined question not present in dataset: " + mq.qid);
    }
    if (mq.closed_book_correct || !mq.has_strong) {
      ++skipped;
      continue;
    }
    std::map<std::string, std::string> text_by_sid;
    for (const auto& s : question_sentences(*it->second, split_cfg)) {
      text_by_sid[s.id] = s.text;
    }
    QuestionPools p;
    p.question = it->second->question;
    for (const auto& e : mq.entries) {
      auto ts = text_by_sid.find(e.sid);
      if (ts == text_by_sid.end()) {
        throw std::runtime_error("mined sentence id not found in dataset: " + e.sid);
      }
      switch (e.label) {
        case EvidentialityLabel::Strong: p.strong.push_back(ts->second); break;
        case EvidentialityLabel::Weak: p.weak.push_back(ts->second); break;
        case EvidentialityLabel::Distractor: p.distractor.push_back(ts->second); break;
        case EvidentialityLabel::Unlabeled: break;
      }
    }
    if (p.strong.empty()) {
      ++skipped;
      continue;
    }
    pools.push_back(std::move(p));
  }
  if (pools.empty()) {
    throw std::runtime_error(
        "no trainable questions: every question is closed-book correct or lacks strong "
        "evidence");
  }

  EncoderModel model = EncoderModel::random_init(cfg.dim, cfg.bucket_count, cfg.hash_seed,
                                                 cfg.seed, cfg.init_scale);
  if (report) {
    report->epoch_mean_loss.clear();
    report->trainable_questions = pools.size();
    report->skipped_questions = skipped;
  }

  SplitMix64 rng(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  std::vector<double> vq, vd;
  if (cfg.optimizer == TrainConfig::Optimizer::MomentumSgd) {
    vq.assign(model.query_table.size(), 0.0);
    vd.assign(model.doc_table.size(), 0.0);
  }

  const std::size_t want_weak = static_cast<std::size_t>(std::llround(
      cfg.weak_fraction_in_se_negatives * static_cast<double>(cfg.negatives_per_batch)));

  std::vector<std::size_t> order(pools.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t qi : order) {
      const QuestionPools& p = pools[qi];
      TrainingBatch batch;
      batch.question = p.question;
      batch.strong = sample_texts(p.strong, cfg.positives_per_batch, rng);
      std::size_t take_weak = std::min(p.weak.size(), want_weak);
      std::size_t take_dis =
          std::min(p.distractor.size(), cfg.negatives_per_batch - take_weak);
      if (take_weak + take_dis < cfg.negatives_per_batch) {
        take_weak = std::min(p.weak.size(), cfg.negatives_per_batch - take_dis);
      }
      batch.weak = sample_texts(p.weak, take_weak, rng);
      batch.distractor = sample_texts(p.distractor, take_dis, rng);

      loss_sum += total_loss(model, batch, cfg.tau);
      GradientTables g = gradient(model, batch, cfg.tau);
      if (cfg.optimizer == TrainConfig::Optimizer::Sgd) {
        apply_sparse_sgd(model.query_table, model.dim, g.query, cfg.learning_rate);
        apply_sparse_sgd(model.doc_table, model.dim, g.doc, cfg.learning_rate);
      } else {
        apply_momentum(model.query_table, vq, model.dim, g.query, cfg.learning_rate,
                       cfg.momentum);
        apply_momentum(model.doc_table, vd, model.dim, g.doc, cfg.learning_rate,
                       cfg.momentum);
      }
    }
    if (report) {
      report->epoch_mean_loss.push_back(loss_sum / static_cast<double>(pools.size()));
    }
  }
  return model;
}

namespace {

void write_f32_le(std::ostream& out, const std::vector<float>& values) {
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
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

std::vector<float> read_f32_le(const unsigned char* bytes, std::size_t count) {
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i + 0]) |
                         (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                         (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                         (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    std::memcpy(&values[i], &bits, 4);
  }
  return values;
}

}  // namespace

void save_model(const EncoderModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write encoder model to " + path);
  json header;
  header["format"] = kModelFormat;
  header["dim"] = model.dim;
  header["bucket_count"] = model.bucket_count;
  header["hash_seed"] = model.hash_seed;
  out << header.dump() << "\n";
  write_f32_le(out, model.query_table);
  write_f32_le(out, model.doc_table);
  if (!out) throw std::runtime_error("write failed for encoder model " + path);
}

EncoderModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open encoder model file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("encoder model file is empty: " + path);
  }
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("encoder model header is not valid JSON: ") +
                             e.what());
  }
  const std::string format = header.at("format").get<std::string>();
  if (format != kModelFormat) {
    throw std::runtime_error("unsupported encoder model format: " + format);
  }
  EncoderModel model;
  model.dim = header.at("dim").get<std::size_t>();
  model.bucket_count = header.at("bucket_count").get<std::size_t>();
  model.hash_seed = header.at("hash_seed").get<std::uint64_t>();
  check_geometry(model.dim, model.bucket_count);

  std::vector<unsigned char> payload(std::istreambuf_iterator<char>(in), {});
  const std::size_t per_table = model.bucket_count * model.dim;
  const std::size_t expected = 2 * per_table * 4;
  if (payload.size() < expected) {
    throw std::runtime_error("encoder model file truncated: " + path);
  }
  if (payload.size() > expected) {
    throw std::runtime_error("encoder model file has trailing data: " + path);
  }
  model.query_table = read_f32_le(payload.data(), per_table);
  model.doc_table = read_f32_le(payload.data() + per_table * 4, per_table);
  return model;
}

std::string model_fingerprint(const EncoderModel& model) {
  std::ostringstream blob;
  blob << kModelFormat << "|" << model.dim << "|" << model.bucket_count << "|"
       << model.hash_seed << "|";
  write_f32_le(blob, model.query_table);
  write_f32_le(blob, model.doc_table);
  const std::string bytes = blob.str();
  std::uint64_t h = fnv1a64(bytes);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

}  // namespace ecorag
