#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ecorag/corpus.hpp"
#include "ecorag/oracle.hpp"

namespace ecorag {

enum class EvidentialityLabel { Strong, Weak, Distractor, Unlabeled };

std::string label_name(EvidentialityLabel label);
EvidentialityLabel label_from_name(const std::string& name);

struct MinedEntry {
  std::string qid;
  std::string sid;
  EvidentialityLabel label = EvidentialityLabel::Unlabeled;
};

struct MinedQuestion {
  std::string qid;
  std::vector<MinedEntry> entries;  // one per sentence, input order
  bool closed_book_correct = false;
  bool has_strong = false;
  std::size_t oracle_calls = 0;
};

struct MinedDataset {
  std::vector<MinedQuestion> questions;
};

enum class AnchorPolicy { FirstStrong, AllStrong };

struct MinerOptions {
  AnchorPolicy anchor = AnchorPolicy::FirstStrong;
  MatchMode match = MatchMode::Containment;
  std::string template_id = "qa-fewshot-v1";
};

// Hierarchical labeling for one question:
//   closed-book correct        -> everything Unlabeled, question flagged
//   sentence alone answers     -> Strong
//   else, probed in front of the anchor: still correct -> Weak, else Distractor
//   no Strong sentence at all  -> everything Unlabeled, has_strong = false
// Uses at most 2*|sentences| + 1 oracle calls.
MinedQuestion mine_question(const QuestionRecord& record,
                            const std::vector<SentenceUnit>& sentences, Oracle& oracle,
                            const MinerOptions& options);

struct MiningStats {
  std::size_t strong = 0;
  std::size_t weak = 0;
  std::size_t distractor = 0;
  std::size_t unlabeled = 0;
  std::size_t closed_book_correct_questions = 0;
  std::size_t no_strong_questions = 0;
  std::size_t oracle_calls = 0;
  std::vector<std::string> failed_qids;
  std::vector<std::string> failures;  // "qid: message"
};

MinedDataset mine_dataset(const std::vector<QuestionRecord>& records, Oracle& oracle,
                          const TokenizerConfig& tokenizer, const MinerOptions& options,
                          int workers, MiningStats* stats = nullptr);

void save_mined(const MinedDataset& mined, const std::string& path);
MinedDataset load_mined(const std::string& path);

}  // namespace ecorag
