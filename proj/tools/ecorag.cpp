#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecorag/bench.hpp"
#include "ecorag/compressor.hpp"
#include "ecorag/config.hpp"
#include "ecorag/corpus.hpp"
#include "ecorag/encoder.hpp"
#include "ecorag/evaluator.hpp"
#include "ecorag/metrics.hpp"
#include "ecorag/miner.hpp"
#include "ecorag/oracle.hpp"

namespace {

using ecorag::RunConfig;
using nlohmann::json;

// Exit codes: 0 success, 2 configuration error, 3 runtime error.
constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct CommandArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // flag order
};

void register_config_flags(CLI::App* cmd, CommandArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  for (const auto& doc : ecorag::config_key_docs()) {
    const std::string key = doc.key;
    cmd->add_option_function<std::string>(
           "--" + key,
           [&args, key](const std::string& value) { args.overrides.emplace_back(key, value); },
           doc.doc)
        ->type_name("VALUE");
  }
  cmd->footer(
      "Flag values are read as JSON when they parse as JSON (numbers, booleans,\n"
      "null, arrays) and as plain strings otherwise. Precedence: flag > config\n"
      "file > built-in default.");
}

RunConfig build_config(const CommandArgs& args) {
  json root = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) {
      throw ecorag::ConfigError({"cannot open config file: " + args.config_path});
    }
    try {
      root = json::parse(in);
    } catch (const json::exception& e) {
      throw ecorag::ConfigError(
          {std::string("config file is not valid JSON: ") + e.what()});
    }
  }
  for (const auto& [key, value] : args.overrides) {
    ecorag::set_dotted_key(root, key, value);
  }
  return ecorag::parse_config(root);
}

// Writes through a temporary file and renames, so a crash never leaves a
// half-written artifact at the destination.
template <typename Writer>
void write_atomic(const std::string& path, Writer&& writer) {
  const std::string tmp = path + ".tmp";
  try {
    writer(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

struct OracleBundle {
  std::unique_ptr<ecorag::Oracle> base;
  std::unique_ptr<ecorag::CachingOracle> cache;
  ecorag::Oracle& get() { return cache ? static_cast<ecorag::Oracle&>(*cache) : *base; }
};

OracleBundle make_oracle(const RunConfig& cfg) {
  ecorag::validate_oracle_config(cfg.oracle);
  OracleBundle bundle;
  if (cfg.oracle.mode == "scripted") {
    bundle.base = std::make_unique<ecorag::ScriptedOracle>(
        ecorag::ScriptedOracle::from_json_file(cfg.oracle.script));
  } else {
    ecorag::HttpOracleConfig hc;
    hc.base_url = cfg.oracle.base_url;
    hc.model = cfg.oracle.model;
    hc.timeout_ms = cfg.oracle.timeout_ms;
    hc.retries = cfg.oracle.retries;
    hc.backoff_ms = cfg.oracle.backoff_ms;
    hc.in_flight_limit = cfg.oracle.in_flight_limit;
    if (const char* key = std::getenv("ECORAG_API_KEY")) hc.api_key = key;
    bundle.base = std::make_unique<ecorag::HttpOracle>(
        ecorag::make_httplib_transport(cfg.oracle.base_url, cfg.oracle.timeout_ms), hc);
  }
  if (!cfg.paths.cache.empty()) {
    bundle.cache = std::make_unique<ecorag::CachingOracle>(*bundle.base, cfg.paths.cache);
  }
  return bundle;
}

std::vector<ecorag::QuestionRecord> load_records(const RunConfig& cfg) {
  if (cfg.paths.dataset.empty()) {
    throw ecorag::ConfigError({"paths.dataset is required for this command"});
  }
  ecorag::LoadReport report;
  auto records = ecorag::load_dataset(cfg.paths.dataset, cfg.strict, &report);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return records;
}

int cmd_mine(const RunConfig& cfg) {
  const auto records = load_records(cfg);
  OracleBundle oracle = make_oracle(cfg);
  ecorag::MiningStats stats;
  const ecorag::MinedDataset mined =
      ecorag::mine_dataset(records, oracle.get(), cfg.tokenizer,
                           ecorag::miner_options(cfg.miner), cfg.miner.workers, &stats);
  write_atomic(cfg.paths.mined,
               [&](const std::string& tmp) { ecorag::save_mined(mined, tmp); });

  json summary;
  summary["questions"] = mined.questions.size();
  summary["labels"] = {{"strong", stats.strong},
                       {"weak", stats.weak},
                       {"distractor", stats.distractor},
                       {"unlabeled", stats.unlabeled}};
  summary["closed_book_correct"] = stats.closed_book_correct_questions;
  summary["no_strong"] = stats.no_strong_questions;
  summary["oracle_calls"] = stats.oracle_calls;
  if (oracle.cache) {
    summary["cache"] = {{"hits", oracle.cache->hits()},
                        {"forwarded", oracle.cache->forwarded()}};
  }
  if (!stats.failures.empty()) summary["failures"] = stats.failures;
  std::cout << summary.dump(2) << "\n";
  if (cfg.strict && !stats.failures.empty()) {
    throw std::runtime_error("mining failed for " +
                             std::to_string(stats.failures.size()) + " question(s)");
  }
  std::cout << "wrote " << cfg.paths.mined << "\n";
  return 0;
}

int cmd_train_encoder(const RunConfig& cfg) {
  const auto records = load_records(cfg);
  const ecorag::MinedDataset mined = ecorag::load_mined(cfg.paths.mined);
  ecorag::TrainReport report;
  const ecorag::EncoderModel model =
      ecorag::train_encoder(mined, records, ecorag::encoder_train_config(cfg), &report);
  write_atomic(cfg.paths.encoder_model,
               [&](const std::string& tmp) { ecorag::save_model(model, tmp); });

  json summary;
  summary["trainable_questions"] = report.trainable_questions;
  summary["skipped_questions"] = report.skipped_questions;
  summary["epoch_mean_loss"] = report.epoch_mean_loss;
  summary["fingerprint"] = ecorag::model_fingerprint(model);
  std::cout << summary.dump(2) << "\n";
  std::cout << "wrote " << cfg.paths.encoder_model << "\n";
  return 0;
}

int cmd_train_evaluator(const RunConfig& cfg) {
  const auto records = load_records(cfg);
  const ecorag::MinedDataset mined = ecorag::load_mined(cfg.paths.mined);
  const ecorag::EncoderModel encoder = ecorag::load_model(cfg.paths.encoder_model);
  ecorag::TrainsetOptions tso;
  tso.ratio = cfg.evaluator.ratio;
  tso.augment_concatenated = cfg.evaluator.augment_concatenated;
  const ecorag::EvaluatorTrainSet trainset =
      ecorag::build_trainset(mined, records, encoder, tso);
  if (trainset.shortfall) {
    std::cerr << "warning: only " << trainset.negatives.size()
              << " negatives available for " << trainset.positives.size()
              << " positives (wanted ratio " << tso.ratio << ")\n";
  }
  ecorag::EvaluatorTrainReport report;
  const ecorag::EvaluatorClassifier clf = ecorag::train_evaluator(
      trainset, encoder, ecorag::evaluator_train_config(cfg), &report);
  write_atomic(cfg.paths.evaluator_model,
               [&](const std::string& tmp) { ecorag::save_evaluator(clf, tmp); });

  json summary;
  summary["positives"] = trainset.positives.size();
  summary["negatives"] = trainset.negatives.size();
  summary["epoch_loss_first"] = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.front();
  summary["epoch_loss_last"] = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back();
  summary["encoder_fingerprint"] = clf.encoder_fingerprint;
  std::cout << summary.dump(2) << "\n";
  std::cout << "wrote " << cfg.paths.evaluator_model << "\n";
  return 0;
}

// Owns whatever the chosen evaluator points into. The classifier and the
// oracle live on the heap so their addresses survive moves of the bundle —
// the evaluator keeps raw pointers to them.
struct EvaluatorBundle {
  std::unique_ptr<OracleBundle> oracle;
  std::unique_ptr<ecorag::EvaluatorClassifier> classifier;
  std::unique_ptr<ecorag::Evaluator> evaluator;
};

EvaluatorBundle make_evaluator(const RunConfig& cfg, const ecorag::EncoderModel& encoder,
                               const std::vector<ecorag::QuestionRecord>& records) {
  EvaluatorBundle bundle;
  if (cfg.compress.evaluator == "classifier") {
    bundle.classifier = std::make_unique<ecorag::EvaluatorClassifier>(
        ecorag::load_evaluator(cfg.paths.evaluator_model,
                               ecorag::model_fingerprint(encoder)));
    bundle.evaluator =
        std::make_unique<ecorag::ClassifierEvaluator>(*bundle.classifier, encoder);
  } else if (cfg.compress.evaluator == "oracle") {
    bundle.oracle = std::make_unique<OracleBundle>(make_oracle(cfg));
    std::map<std::string, std::vector<std::string>> golds;
    for (const auto& r : records) golds[r.question] = r.gold_answers;
    bundle.evaluator = std::make_unique<ecorag::OracleEvaluator>(
        bundle.oracle->get(), std::move(golds),
        ecorag::match_mode_from_name(cfg.miner.match), cfg.miner.template_id);
  } else {
    bundle.evaluator =
        std::make_unique<ecorag::ThresholdEvaluator>(encoder, cfg.compress.threshold);
  }
  return bundle;
}

int cmd_compress(const RunConfig& cfg) {
  const auto records = load_records(cfg);
  const ecorag::EncoderModel encoder = ecorag::load_model(cfg.paths.encoder_model);
  EvaluatorBundle evaluator = make_evaluator(cfg, encoder, records);

  ecorag::CompressOptions options;
  options.limits = ecorag::compression_limits(cfg.compress);
  options.tokenizer = cfg.tokenizer;
  options.strict = cfg.strict;
  options.workers = cfg.compress.workers;
  options.document_order = cfg.compress.document_order;
  const ecorag::CompressOutcome outcome =
      ecorag::compress_dataset(records, encoder, *evaluator.evaluator, options);
  write_atomic(cfg.paths.compressed, [&](const std::string& tmp) {
    ecorag::save_compression_results(outcome.results, tmp);
  });

  json summary;
  summary["records"] = outcome.summary.records;
  summary["failures"] = outcome.summary.failures;
  summary["mean_tokens"] = outcome.summary.mean_tokens;
  summary["median_tokens"] = outcome.summary.median_tokens;
  summary["total_evaluator_calls"] = outcome.summary.total_evaluator_calls;
  summary["mean_evaluator_calls"] = outcome.summary.mean_evaluator_calls;
  summary["stop_reasons"] = outcome.summary.stop_reasons;
  summary["timing"] = {{"ranking_seconds", outcome.summary.ranking_seconds},
                       {"evaluation_seconds", outcome.summary.evaluation_seconds},
                       {"total_seconds", outcome.summary.total_seconds}};
  if (!outcome.summary.failure_messages.empty()) {
    summary["failure_messages"] = outcome.summary.failure_messages;
  }
  std::cout << summary.dump(2) << "\n";
  std::cout << "wrote " << cfg.paths.compressed << "\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const auto records = load_records(cfg);
  const std::vector<ecorag::StrategySpec> strategies = ecorag::bench_strategies(cfg);

  bool any_encoder = false;
  bool any_adaptive = false;
  for (const auto& s : strategies) {
    if (s.kind == ecorag::StrategyKind::TopkTruncation ||
        s.kind == ecorag::StrategyKind::Threshold ||
        s.kind == ecorag::StrategyKind::EcoragAdaptive) {
      any_encoder = true;
    }
    if (s.kind == ecorag::StrategyKind::EcoragAdaptive) any_adaptive = true;
  }

  std::unique_ptr<ecorag::EncoderModel> encoder;
  if (any_encoder) {
    encoder =
        std::make_unique<ecorag::EncoderModel>(ecorag::load_model(cfg.paths.encoder_model));
  }
  EvaluatorBundle evaluator;
  if (any_adaptive) evaluator = make_evaluator(cfg, *encoder, records);

  OracleBundle oracle = make_oracle(cfg);
  ecorag::BenchOptions options;
  options.match = ecorag::match_mode_from_name(cfg.bench.match);
  options.tokenizer = cfg.tokenizer;
  options.template_id = cfg.bench.template_id;
  options.ndcg_cutoffs = cfg.bench.ndcg_cutoffs;
  options.document_order = cfg.compress.document_order;
  const std::vector<ecorag::EvalReport> reports = ecorag::run_benchmark(
      records, strategies, oracle.get(), encoder.get(), evaluator.evaluator.get(), options);

  std::filesystem::create_directories(cfg.paths.report_dir);
  for (const auto& report : reports) {
    const std::string base = cfg.paths.report_dir + "/" + report.strategy;
    ecorag::write_report_json(report, base + ".json");
    ecorag::write_report_csv(report, base + ".csv");
  }
  ecorag::write_comparison_table(reports, cfg.paths.report_dir + "/comparison.txt");
  std::cout << ecorag::comparison_table(reports);
  std::cout << "wrote " << reports.size() << " reports under " << cfg.paths.report_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Evidentiality-guided context compression for retrieval-augmented QA.\n"
      "Pipeline: mine -> train-encoder -> train-evaluator -> compress -> bench."};
  app.require_subcommand(1);

  CommandArgs mine_args, enc_args, eval_args, compress_args, bench_args;
  CLI::App* mine = app.add_subcommand(
      "mine", "Label each sentence's evidentiality with the answer oracle");
  register_config_flags(mine, mine_args);
  CLI::App* train_encoder = app.add_subcommand(
      "train-encoder", "Train the sentence-ranking dual encoder on mined labels");
  register_config_flags(train_encoder, enc_args);
  CLI::App* train_evaluator = app.add_subcommand(
      "train-evaluator", "Train the sufficiency classifier on mined labels");
  register_config_flags(train_evaluator, eval_args);
  CLI::App* compress = app.add_subcommand(
      "compress", "Adaptively compress each question's documents");
  register_config_flags(compress, compress_args);
  CLI::App* bench = app.add_subcommand(
      "bench", "Compare context strategies end to end and write reports");
  register_config_flags(bench, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (mine->parsed()) return cmd_mine(build_config(mine_args));
    if (train_encoder->parsed()) return cmd_train_encoder(build_config(enc_args));
    if (train_evaluator->parsed()) return cmd_train_evaluator(build_config(eval_args));
    if (compress->parsed()) return cmd_compress(build_config(compress_args));
    if (bench->parsed()) return cmd_bench(build_config(bench_args));
  } catch (const ecorag::ConfigError& e) {
    json err;
    err["error"] = e.what();
    err["problems"] = e.messages();
    std::cerr << err.dump() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
