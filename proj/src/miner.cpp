#include "ecorag/miner.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecorag {

using nlohmann::json;

std::string label_name(EvidentialityLabel label) {
  switch (label) {
    case EvidentialityLabel::Strong: return "STRONG";
    case EvidentialityLabel::Weak: return "WEAK";
    case EvidentialityLabel::Distractor: return "DISTRACTOR";
    case EvidentialityLabel::Unlabeled: return "UNLABELED";
  }
  return "UNLABELED";
}

EvidentialityLabel label_from_name(const std::string& name) {
  if (name == "STRONG") return EvidentialityLabel::Strong;
  if (name == "WEAK") return EvidentialityLabel::Weak;
  if (name == "DISTRACTOR") return EvidentialityLabel::Distractor;
  if (name == "UNLABELED") return EvidentialityLabel::Unlabeled;
  throw std::runtime_error("unknown evidentiality label: " + name);
}

MinedQuestion mine_question(const QuestionRecord& record,
                            const std::vector<SentenceUnit>& sentences, Oracle& oracle,
                            const MinerOptions& options) {
  MinedQuestion out;
  out.qid = record.id;
  out.entries.reserve(sentences.size());
  for (const auto& s : sentences) {
    out.entries.push_back({record.id, s.id, EvidentialityLabel::Unlabeled});
  }

  auto ask = [&](const std::optional<std::string>& context) {
    OracleRequest req;
    req.question = record.question;
    req.context = context;
    req.template_id = options.template_id;
    ++out.oracle_calls;
    return is_correct(oracle.generate(req), record.gold_answers, options.match);
  };

  // Parametric knowledge gate: a question the model answers with no context
  // gives no signal about any sentence.
  if (ask(std::nullopt)) {
    out.closed_book_correct = true;
    return out;
  }

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (ask(sentences[i].text)) {
      out.entries[i].label = EvidentialityLabel::Strong;
      out.has_strong = true;
    }
  }
  if (!out.has_strong) return out;

  std::string anchor;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (out.entries[i].label != EvidentialityLabel::Strong) continue;
    if (options.anchor == AnchorPolicy::FirstStrong) {
      anchor = sentences[i].text;
      break;
    }
    if (!anchor.empty()) anchor += " ";
    anchor += sentences[i].text;
  }

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (out.entries[i].label == EvidentialityLabel::Strong) continue;
    // Candidate placed before the anchor: a distractor must get the chance
    // to interfere with the evidence.
    std::string probe = sentences[i].text + " " + anchor;
    out.entries[i].label =
        ask(probe) ? EvidentialityLabel::Weak : EvidentialityLabel::Distractor;
  }
  return out;
}

MinedDataset mine_dataset(const std::vector<QuestionRecord>& records, Oracle& oracle,
                          const TokenizerConfig& tokenizer, const MinerOptions& options,
                          int workers, MiningStats* stats) {
  MinedDataset out;
  out.questions.resize(records.size());
  std::vector<std::string> errors(records.size());

  if (workers < 1) workers = 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      auto sentences = question_sentences(records[i], tokenizer);
      out.questions[i] = mine_question(records[i], sentences, oracle, options);
    } catch (const std::exception& e) {
      out.questions[i].qid = records[i].id;
      errors[i] = e.what();
    }
  }

  if (stats) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!errors[i].empty()) {
        stats->failed_qids.push_back(records[i].id);
        stats->failures.push_back(records[i].id + ": " + errors[i]);
        continue;
      }
      const auto& q = out.questions[i];
      stats->oracle_calls += q.oracle_calls;
      if (q.closed_book_correct) ++stats->closed_book_correct_questions;
      if (!q.closed_book_correct && !q.has_strong) ++stats->no_strong_questions;
      for (const auto& e : q.entries) {
        switch (e.label) {
          case EvidentialityLabel::Strong: ++stats->strong; break;
          case EvidentialityLabel::Weak: ++stats->weak; break;
          case EvidentialityLabel::Distractor: ++stats->distractor; break;
          case EvidentialityLabel::Unlabeled: ++stats->unlabeled; break;
        }
      }
    }
  }

  // Drop failed questions from the dataset; they are reported via stats.
  MinedDataset kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (errors[i].empty()) kept.questions.push_back(std::move(out.questions[i]));
  }
  return kept;
}

void save_mined(const MinedDataset& mined, const std::string& path) {
  std::ofstream outf(path, std::ios::trunc);
  if (!outf) throw std::runtime_error("cannot write mined labels to " + path);
  for (const auto& q : mined.questions) {
    for (const auto& e : q.entries) {
      json line;
      line["qid"] = e.qid;
      line["sid"] = e.sid;
      line["label"] = label_name(e.label);
      line["closed_book_correct"] = q.closed_book_correct;
      line["has_strong"] = q.has_strong;
      outf << line.dump() << "\n";
    }
  }
}

MinedDataset load_mined(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mined labels file: " + path);
  MinedDataset out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("mined labels line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    std::string qid = j.at("qid").get<std::string>();
    auto [it, inserted] = index.emplace(qid, out.questions.size());
    if (inserted) {
      MinedQuestion q;
      q.qid = qid;
      q.closed_book_correct = j.at("closed_book_correct").get<bool>();
      q.has_strong = j.at("has_strong").get<bool>();
      out.questions.push_back(std::move(q));
    }
    MinedEntry entry;
    entry.qid = qid;
    entry.sid = j.at("sid").get<std::string>();
    entry.label = label_from_name(j.at("label").get<std::string>());
    out.questions[it->second].entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace ecorag
