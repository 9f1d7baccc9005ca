// Shared test corpora: hand-traced mining questions with a scripted oracle,
// a separable contrastive-training corpus, and a distractor-density corpus
// whose oracle is confused by decoy text placed ahead of the evidence.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecorag/corpus.hpp"
#include "ecorag/miner.hpp"
#include "ecorag/oracle.hpp"
#include "ecorag/util.hpp"

namespace fixtures {

inline std::string pad2(std::size_t n) {
  std::string s = std::to_string(n);
  return s.size() < 2 ? "0" + s : s;
}

// Sentence boundaries require the next sentence to open uppercase, so every
// generated sentence gets a capital first letter.
inline std::string capitalized(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') {
    text[0] = static_cast<char>(text[0] - 'a' + 'A');
  }
  return text;
}

// --------------------------------------------------------------------------
// Hand-traced mining fixtures. Expected labels and oracle call counts are
// worked out by hand from the labeling procedure:
//   calls = 1 closed-book probe
//         + |S| solo probes                  (skipped if closed-book correct)
//         + #non-strong paired probes       (skipped if no strong was found)
// --------------------------------------------------------------------------

struct TracedSentence {
  std::string text;  // no terminator; the document joins with ". "
  ecorag::EvidentialityLabel expected;
};

struct TracedQuestion {
  std::string qid;
  std::string question;
  std::string gold;
  bool closed_book_knows = false;  // oracle answers correctly with no context
  bool has_rule = true;            // oracle can answer from evidence at all
  std::vector<TracedSentence> sentences;
  bool expect_closed_book_correct = false;
  bool expect_has_strong = false;
  std::size_t expected_calls = 0;
};

inline std::vector<TracedQuestion> traced_questions() {
  using ecorag::EvidentialityLabel;
  const auto S = EvidentialityLabel::Strong;
  const auto W = EvidentialityLabel::Weak;
  const auto D = EvidentialityLabel::Distractor;
  const auto U = EvidentialityLabel::Unlabeled;

  std::vector<TracedQuestion> qs;
  // counts: s strong, w weak, d distractor appended in that order unless a
  // custom order is given below.
  auto add = [&qs](std::size_t num, std::size_t s, std::size_t w, std::size_t d) {
    const std::string id = pad2(num);
    TracedQuestion q;
    q.qid = "q" + id;
    q.question = "what does ledger " + id + " record";
    q.gold = "gold" + id;
    q.expect_has_strong = s > 0;
    // Sentences start uppercase so the splitter's boundary rule fires.
    for (std::size_t j = 0; j < s; ++j) {
      q.sentences.push_back({"The record fact" + id + " entry s" + std::to_string(j) +
                                 " holds the answer",
                             EvidentialityLabel::Strong});
    }
    for (std::size_t j = 0; j < w; ++j) {
      q.sentences.push_back({"An incidental remark w" + id + "x" + std::to_string(j) +
                                 " with no bearing",
                             EvidentialityLabel::Weak});
    }
    for (std::size_t j = 0; j < d; ++j) {
      q.sentences.push_back({"A misleading bad" + id + "_" + std::to_string(j) +
                                 " claim appears",
                             EvidentialityLabel::Distractor});
    }
    q.expected_calls = 1 + (s + w + d) + (s > 0 ? (w + d) : 0);
    qs.push_back(std::move(q));
    return &qs.back();
  };

  add(1, 1, 1, 1);   // q01: calls 1+3+2 = 6
  add(2, 2, 2, 2);   // q02: calls 1+6+4 = 11
  add(3, 1, 0, 3);   // q03: calls 1+4+3 = 8
  add(4, 1, 3, 0);   // q04: calls 1+4+3 = 8
  add(5, 3, 1, 1);   // q05: calls 1+5+2 = 8
  add(6, 1, 2, 2);   // q06: calls 1+5+4 = 10
  add(7, 2, 1, 0);   // q07: calls 1+3+1 = 5
  add(8, 2, 0, 1);   // q08: calls 1+3+1 = 5
  add(9, 1, 1, 3);   // q09: calls 1+5+4 = 10
  add(10, 1, 4, 1);  // q10: calls 1+6+5 = 12

  // q11, q12: the oracle already knows the answer closed-book, so every
  // sentence stays unlabeled and exactly one call is made.
  {
    TracedQuestion* q = add(11, 1, 1, 1);
    q->closed_book_knows = true;
    q->expect_closed_book_correct = true;
    q->expect_has_strong = false;
    for (auto& sentence : q->sentences) sentence.expected = U;
    q->expected_calls = 1;
  }
  {
    TracedQuestion* q = add(12, 1, 1, 0);
    q->closed_book_knows = true;
    q->expect_closed_book_correct = true;
    q->expect_has_strong = false;
    for (auto& sentence : q->sentences) sentence.expected = U;
    q->expected_calls = 1;
  }

  // q13, q14: no sentence lets the oracle answer (no rule), so after the
  // closed-book and solo probes everything stays unlabeled.
  {
    TracedQuestion* q = add(13, 0, 3, 0);
    q->has_rule = false;
    for (auto& sentence : q->sentences) sentence.expected = U;
    q->expected_calls = 1 + 3;
  }
  {
    TracedQuestion* q = add(14, 0, 2, 2);
    q->has_rule = false;
    for (auto& sentence : q->sentences) sentence.expected = U;
    q->expected_calls = 1 + 4;
  }

  add(15, 1, 0, 0);  // q15: lone strong sentence, calls 1+1 = 2
  add(16, 3, 0, 0);  // q16: every sentence strong, calls 1+3 = 4
  add(17, 1, 2, 0);  // q17: calls 1+3+2 = 6
  add(18, 1, 0, 2);  // q18: calls 1+3+2 = 6

  // q19: custom order D W S W D to check labels follow sentence order.
  {
    TracedQuestion q;
    q.qid = "q19";
    q.question = "what does ledger 19 record";
    q.gold = "gold19";
    q.expect_has_strong = true;
    q.sentences = {
        {"A misleading bad19_0 claim appears", D},
        {"An incidental remark w19x0 with no bearing", W},
        {"The record fact19 entry s0 holds the answer", S},
        {"An incidental remark w19x1 with no bearing", W},
        {"A misleading bad19_1 claim appears", D},
    };
    q.expected_calls = 1 + 5 + 4;  // = 10
    qs.push_back(std::move(q));
  }
  // q20: order W S D.
  {
    TracedQuestion q;
    q.qid = "q20";
    q.question = "what does ledger 20 record";
    q.gold = "gold20";
    q.expect_has_strong = true;
    q.sentences = {
        {"An incidental remark w20x0 with no bearing", W},
        {"The record fact20 entry s0 holds the answer", S},
        {"A misleading bad20_0 claim appears", D},
    };
    q.expected_calls = 1 + 3 + 2;  // = 6
    qs.push_back(std::move(q));
  }
  add(21, 1, 0, 4);  // q21: calls 1+5+4 = 10

  return qs;
}

inline ecorag::QuestionRecord traced_record(const TracedQuestion& q) {
  ecorag::QuestionRecord record;
  record.id = q.qid;
  record.question = q.question;
  record.gold_answers = {q.gold};
  ecorag::DocumentRecord doc;
  doc.id = q.qid + "-doc";
  std::string body;
  for (const auto& s : q.sentences) {
    if (!body.empty()) body += " ";
    body += s.text + ".";
  }
  doc.body = body;
  record.documents = {std::move(doc)};
  return record;
}

inline std::vector<ecorag::QuestionRecord> traced_records(
    const std::vector<TracedQuestion>& qs) {
  std::vector<ecorag::QuestionRecord> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(traced_record(q));
  return out;
}

inline ecorag::ScriptedOracle traced_oracle(const std::vector<TracedQuestion>& qs) {
  ecorag::ScriptedOracle oracle("unknown");
  for (const auto& q : qs) {
    const std::string id = q.qid.substr(1);  // "q07" -> "07"
    ecorag::ScriptedEntry entry;
    entry.closed_book_answer = q.closed_book_knows ? q.gold : "unknown";
    entry.default_answer = "unknown";
    if (q.has_rule) {
      ecorag::ContextRule rule;
      rule.evidence = "fact" + id;
      rule.decoys = {"bad" + id + "_"};
      rule.answer = q.gold;
      entry.rules.push_back(std::move(rule));
    }
    oracle.add_question(q.question, std::move(entry));
  }
  return oracle;
}

// --------------------------------------------------------------------------
// Separable training corpus: `questions` questions over `topics` shared
// topics. Strong sentences carry the topic's proof token, weak its hint
// token, distractors either shared noise or another topic's proof token.
// Labels are planted by construction, so no oracle is involved.
// --------------------------------------------------------------------------

struct SeparableQuestion {
  ecorag::QuestionRecord record;
  std::vector<ecorag::EvidentialityLabel> labels;  // one per sentence, in order
};

struct SeparableCorpus {
  std::vector<SeparableQuestion> questions;
  std::size_t strong_per_question = 2;
  std::size_t weak_per_question = 6;
  std::size_t distractor_per_question = 12;
};

inline SeparableCorpus separable_corpus(std::size_t questions = 200,
                                        std::size_t topics = 20,
                                        std::uint64_t seed = 1) {
  using ecorag::EvidentialityLabel;
  SeparableCorpus corpus;
  ecorag::SplitMix64 rng(seed);
  for (std::size_t i = 0; i < questions; ++i) {
    const std::size_t topic = i % topics;
    const std::string t = std::to_string(topic);
    SeparableQuestion q;
    q.record.id = "sep" + std::to_string(i);
    q.record.question = "which sentence proves topic" + t + " case" + std::to_string(i);
    q.record.gold_answers = {"proof" + t};

    struct Piece {
      std::string text;
      EvidentialityLabel label;
    };
    std::vector<Piece> pieces;
    for (std::size_t j = 0; j < corpus.strong_per_question; ++j) {
      pieces.push_back({"proof" + t + " statement item s" + std::to_string(i) + "x" +
                            std::to_string(j),
                        EvidentialityLabel::Strong});
    }
    for (std::size_t j = 0; j < corpus.weak_per_question; ++j) {
      pieces.push_back({"hint" + t + " aside item w" + std::to_string(i) + "x" +
                            std::to_string(j),
                        EvidentialityLabel::Weak});
    }
    for (std::size_t j = 0; j < corpus.distractor_per_question; ++j) {
      // Half the distractors carry a different topic's proof token, so the
      // ranking must be question-conditional, not a global goodness score.
      std::string payload;
      if (j % 2 == 0) {
        const std::size_t other = (topic + 1 + j / 2) % topics;
        payload = "proof" + std::to_string(other);
      } else {
        payload = "noise" + std::to_string((i * 31 + j) % 40);
      }
      pieces.push_back({payload + " chatter item d" + std::to_string(i) + "x" +
                            std::to_string(j),
                        EvidentialityLabel::Distractor});
    }
    rng.shuffle(pieces);

    ecorag::DocumentRecord doc;
    doc.id = q.record.id + "-doc";
    for (const auto& piece : pieces) {
      if (!doc.body.empty()) doc.body += " ";
      doc.body += capitalized(piece.text) + ".";
      q.labels.push_back(piece.label);
    }
    q.record.documents = {std::move(doc)};
    corpus.questions.push_back(std::move(q));
  }
  return corpus;
}

inline ecorag::MinedDataset separable_mined(const SeparableCorpus& corpus,
                                            std::size_t begin, std::size_t end) {
  ecorag::MinedDataset mined;
  for (std::size_t i = begin; i < end && i < corpus.questions.size(); ++i) {
    const auto& q = corpus.questions[i];
    ecorag::MinedQuestion mq;
    mq.qid = q.record.id;
    mq.closed_book_correct = false;
    mq.has_strong = true;
    const std::string doc_id = q.record.documents[0].id;
    for (std::size_t j = 0; j < q.labels.size(); ++j) {
      ecorag::MinedEntry entry;
      entry.qid = mq.qid;
      entry.sid = doc_id + "#" + std::to_string(j);
      entry.label = q.labels[j];
      mq.entries.push_back(std::move(entry));
    }
    mined.questions.push_back(std::move(mq));
  }
  return mined;
}

// --------------------------------------------------------------------------
// Distractor-density corpus: each question has one evidence document buried
// at position (i mod docs) among decoy documents. The scripted oracle gets
// the answer right only when no decoy text appears before the evidence, so
// feeding it everything fails more often as the document count grows.
// --------------------------------------------------------------------------

struct DensityCorpus {
  std::vector<ecorag::QuestionRecord> records;
  ecorag::ScriptedOracle oracle{"unknown"};
};

inline DensityCorpus density_corpus(std::size_t questions, std::size_t docs_per_question) {
  DensityCorpus corpus;
  for (std::size_t i = 0; i < questions; ++i) {
    const std::string id = std::to_string(i);
    ecorag::QuestionRecord record;
    record.id = "dq" + id;
    record.question = "what does entry key" + id + " record";
    record.gold_answers = {"val" + id};

    const std::size_t evidence_pos = i % docs_per_question;
    std::size_t decoy_counter = 0;
    for (std::size_t p = 0; p < docs_per_question; ++p) {
      ecorag::DocumentRecord doc;
      if (p == evidence_pos) {
        doc.id = record.id + "-evi";
        doc.body = "An intro note about key" + id + " follows here. Key" + id +
                   " shows val" + id + " via fact" + id +
                   " clearly. A trailing remark closes the note.";
      } else {
        const std::string d = std::to_string(decoy_counter++);
        doc.id = record.id + "-dec" + d;
        doc.body = "A misleading bad" + id + "_" + d +
                   " rumor spreads fast. Another bad" + id + "_" + d +
                   " line repeats the rumor.";
      }
      record.documents.push_back(std::move(doc));
    }

    ecorag::ScriptedEntry entry;
    entry.closed_book_answer = "unknown";
    entry.default_answer = "unknown";
    ecorag::ContextRule rule;
    rule.evidence = "fact" + id;
    rule.decoys = {"bad" + id + "_"};
    rule.answer = "val" + id;
    entry.rules.push_back(std::move(rule));
    corpus.oracle.add_question(record.question, std::move(entry));
    corpus.records.push_back(std::move(record));
  }
  return corpus;
}

}  // namespace fixtures
