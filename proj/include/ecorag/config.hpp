#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecorag/bench.hpp"
#include "ecorag/compressor.hpp"
#include "ecorag/encoder.hpp"
#include "ecorag/evaluator.hpp"
#include "ecorag/miner.hpp"
#include "ecorag/text.hpp"

namespace ecorag {

// Every problem found while reading a config, reported in one shot.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

struct PathsConfig {
  std::string dataset;
  std::string mined = "mined.jsonl";
  std::string cache;  // empty = no response cache
  std::string encoder_model = "encoder.bin";
  std::string evaluator_model = "evaluator.bin";
  std::string compressed = "compressed.jsonl";
  std::string report_dir = "reports";
};

struct OracleConfig {
  std::string mode = "scripted";  // scripted | http
  std::string script;             // scripted answer table (JSON), scripted mode
  std::string base_url;           // http mode
  std::string model;              // http mode
  int timeout_ms = 30000;
  int retries = 3;
  int backoff_ms = 500;
  int in_flight_limit = 4;
};

struct MinerConfig {
  std::string anchor = "first_strong";  // first_strong | all_strong
  std::string match = "containment";    // containment | exact
  std::string template_id = "qa-fewshot-v1";
  int workers = 1;
};

struct EncoderConfig {
  double tau = 1.0;
  double learning_rate = 0.01;
  std::size_t epochs = 10;
  double weak_fraction = 0.15;
  std::string optimizer = "sgd";  // sgd | momentum
  double momentum = 0.9;
  std::size_t positives_per_batch = 8;
  std::size_t negatives_per_batch = 56;
  std::size_t dim = 64;
  std::size_t bucket_count = 65536;
  std::uint64_t hash_seed = 0;
  double init_scale = 0.1;
};

struct EvaluatorConfig {
  std::size_t ratio = 3;
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  bool augment_concatenated = false;
};

struct CompressConfig {
  std::size_t max_pieces = 20;
  std::size_t step = 4;
  std::optional<std::size_t> max_tokens;
  bool document_order = false;
  int workers = 1;
  std::string evaluator = "classifier";  // classifier | oracle | threshold
  double threshold = 0.0;                // threshold evaluator only
};

struct StrategyConfig {
  std::string name;  // defaults to kind
  std::string kind = "no_compression";
  std::size_t topk = 20;
  double threshold = 0.0;
  // Adaptive limits; absent fields fall back to the compress section.
  std::optional<std::size_t> max_pieces;
  std::optional<std::size_t> step;
  std::optional<std::size_t> max_tokens;
};

struct BenchConfig {
  std::vector<StrategyConfig> strategies;  // default set filled by parse
  std::vector<std::size_t> ndcg_cutoffs = {1, 10};
  std::string match = "containment";
  std::string template_id = "qa-fewshot-v1";
};

struct RunConfig {
  PathsConfig paths;
  OracleConfig oracle;
  MinerConfig miner;
  EncoderConfig encoder;
  EvaluatorConfig evaluator;
  CompressConfig compress;
  BenchConfig bench;
  TokenizerConfig tokenizer;
  std::uint64_t seed = 0;
  bool strict = false;
};

// Parses and validates; unknown keys, type mismatches, and invalid values are
// all collected and thrown together as one ConfigError.
RunConfig parse_config(const nlohmann::json& root);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& config);

// Mode-dependent requirements (script file for scripted mode, endpoint and
// model for http mode) are only enforceable when an oracle is actually
// built, so commands that never call one stay configurable without it.
void validate_oracle_config(const OracleConfig& oracle);

// Sets root[dotted path] = value. The raw string is taken as JSON when it
// parses as JSON and as a plain string otherwise.
void set_dotted_key(nlohmann::json& root, const std::string& dotted,
                    const std::string& raw_value);

struct ConfigKeyDoc {
  std::string key;  // dotted leaf name
  std::string doc;  // description including the default
};

// One entry per overridable config key, used for flag registration and help.
const std::vector<ConfigKeyDoc>& config_key_docs();

// Adapters into the module-level option structs.
TrainConfig encoder_train_config(const RunConfig& config);
EvaluatorTrainConfig evaluator_train_config(const RunConfig& config);
CompressionLimits compression_limits(const CompressConfig& compress);
MinerOptions miner_options(const MinerConfig& miner);
MatchMode match_mode_from_name(const std::string& name);
std::vector<StrategySpec> bench_strategies(const RunConfig& config);

}  // namespace ecorag
