#include "ecorag/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ecorag {

using nlohmann::json;

namespace {

std::string join_messages(const std::vector<std::string>& messages) {
  std::ostringstream out;
  out << "configuration invalid (" << messages.size() << " problem"
      << (messages.size() == 1 ? "" : "s") << "):";
  for (const auto& m : messages) out << "\n  - " << m;
  return out.str();
}

// Field extraction that records problems instead of throwing, so a config
// review reports everything at once.
struct Parser {
  std::vector<std::string> errors;

  void unknown_keys(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        errors.push_back("unknown config key: " +
                         (section.empty() ? it.key() : section + "." + it.key()));
      }
    }
  }

  void get_string(const json& obj, const std::string& name, std::string& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!v.is_string()) {
      errors.push_back(name + " must be a string");
      return;
    }
    out = v.get<std::string>();
  }

  void get_bool(const json& obj, const std::string& name, bool& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!v.is_boolean()) {
      errors.push_back(name + " must be a boolean");
      return;
    }
    out = v.get<bool>();
  }

  void get_double(const json& obj, const std::string& name, double& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!v.is_number()) {
      errors.push_back(name + " must be a number");
      return;
    }
    out = v.get<double>();
  }

  void get_int(const json& obj, const std::string& name, int& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!v.is_number_integer()) {
      errors.push_back(name + " must be an integer");
      return;
    }
    out = v.get<int>();
  }

  void get_size(const json& obj, const std::string& name, std::size_t& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
      errors.push_back(name + " must be a non-negative integer");
      return;
    }
    out = v.get<std::size_t>();
  }

  void get_u64(const json& obj, const std::string& name, std::uint64_t& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (!(v.is_number_integer() || v.is_number_unsigned())) {
      errors.push_back(name + " must be an integer");
      return;
    }
    out = v.get<std::uint64_t>();
  }

  void get_opt_size(const json& obj, const std::string& name,
                    std::optional<std::size_t>& out) {
    if (!obj.contains(leaf(name))) return;
    const json& v = obj.at(leaf(name));
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      errors.push_back(name + " must be null or a positive integer");
      return;
    }
    out = v.get<std::size_t>();
  }

  void check_enum(const std::string& name, const std::string& value,
                  const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string options;
    for (const auto& a : allowed) {
      if (!options.empty()) options += " | ";
      options += a;
    }
    errors.push_back(name + " must be one of: " + options + " (got \"" + value + "\")");
  }

  static std::string leaf(const std::string& dotted) {
    auto pos = dotted.rfind('.');
    return pos == std::string::npos ? dotted : dotted.substr(pos + 1);
  }
};

StrategyConfig default_strategy(const std::string& kind) {
  StrategyConfig s;
  s.kind = kind;
  return s;
}

std::vector<StrategyConfig> default_strategies() {
  return {default_strategy("no_compression"), default_strategy("closed_book"),
          default_strategy("topk_truncation"), default_strategy("ecorag_adaptive")};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join_messages(messages)), messages_(std::move(messages)) {}

RunConfig parse_config(const json& root) {
  Parser p;
  RunConfig cfg;
  if (!root.is_object()) {
    throw ConfigError({"config root must be a JSON object"});
  }
  p.unknown_keys(root, "",
                 {"paths", "oracle", "miner", "encoder", "evaluator", "compress", "bench",
                  "tokenizer", "seed", "strict"});

  if (root.contains("paths")) {
    const json& o = root.at("paths");
    if (!o.is_object()) {
      p.errors.push_back("paths must be an object");
    } else {
      p.unknown_keys(o, "paths",
                     {"dataset", "mined", "cache", "encoder_model", "evaluator_model",
                      "compressed", "report_dir"});
      p.get_string(o, "paths.dataset", cfg.paths.dataset);
      p.get_string(o, "paths.mined", cfg.paths.mined);
      p.get_string(o, "paths.cache", cfg.paths.cache);
      p.get_string(o, "paths.encoder_model", cfg.paths.encoder_model);
      p.get_string(o, "paths.evaluator_model", cfg.paths.evaluator_model);
      p.get_string(o, "paths.compressed", cfg.paths.compressed);
      p.get_string(o, "paths.report_dir", cfg.paths.report_dir);
    }
  }

  if (root.contains("oracle")) {
    const json& o = root.at("oracle");
    if (!o.is_object()) {
      p.errors.push_back("oracle must be an object");
    } else {
      p.unknown_keys(o, "oracle",
                     {"mode", "script", "base_url", "model", "timeout_ms", "retries",
                      "backoff_ms", "in_flight_limit"});
      p.get_string(o, "oracle.mode", cfg.oracle.mode);
      p.get_string(o, "oracle.script", cfg.oracle.script);
      p.get_string(o, "oracle.base_url", cfg.oracle.base_url);
      p.get_string(o, "oracle.model", cfg.oracle.model);
      p.get_int(o, "oracle.timeout_ms", cfg.oracle.timeout_ms);
      p.get_int(o, "oracle.retries", cfg.oracle.retries);
      p.get_int(o, "oracle.backoff_ms", cfg.oracle.backoff_ms);
      p.get_int(o, "oracle.in_flight_limit", cfg.oracle.in_flight_limit);
    }
  }

  if (root.contains("miner")) {
    const json& o = root.at("miner");
    if (!o.is_object()) {
      p.errors.push_back("miner must be an object");
    } else {
      p.unknown_keys(o, "miner", {"anchor", "match", "template", "workers"});
      p.get_string(o, "miner.anchor", cfg.miner.anchor);
      p.get_string(o, "miner.match", cfg.miner.match);
      p.get_string(o, "miner.template", cfg.miner.template_id);
      p.get_int(o, "miner.workers", cfg.miner.workers);
    }
  }

  if (root.contains("encoder")) {
    const json& o = root.at("encoder");
    if (!o.is_object()) {
      p.errors.push_back("encoder must be an object");
    } else {
      p.unknown_keys(o, "encoder",
                     {"tau", "learning_rate", "epochs", "weak_fraction", "optimizer",
                      "momentum", "positives_per_batch", "negatives_per_batch", "dim",
                      "bucket_count", "hash_seed", "init_scale"});
      p.get_double(o, "encoder.tau", cfg.encoder.tau);
      p.get_double(o, "encoder.learning_rate", cfg.encoder.learning_rate);
      p.get_size(o, "encoder.epochs", cfg.encoder.epochs);
      p.get_double(o, "encoder.weak_fraction", cfg.encoder.weak_fraction);
      p.get_string(o, "encoder.optimizer", cfg.encoder.optimizer);
      p.get_double(o, "encoder.momentum", cfg.encoder.momentum);
      p.get_size(o, "encoder.positives_per_batch", cfg.encoder.positives_per_batch);
      p.get_size(o, "encoder.negatives_per_batch", cfg.encoder.negatives_per_batch);
      p.get_size(o, "encoder.dim", cfg.encoder.dim);
      p.get_size(o, "encoder.bucket_count", cfg.encoder.bucket_count);
      p.get_u64(o, "encoder.hash_seed", cfg.encoder.hash_seed);
      p.get_double(o, "encoder.init_scale", cfg.encoder.init_scale);
    }
  }

  if (root.contains("evaluator")) {
    const json& o = root.at("evaluator");
    if (!o.is_object()) {
      p.errors.push_back("evaluator must be an object");
    } else {
      p.unknown_keys(o, "evaluator",
                     {"ratio", "epochs", "learning_rate", "augment_concatenated"});
      p.get_size(o, "evaluator.ratio", cfg.evaluator.ratio);
      p.get_size(o, "evaluator.epochs", cfg.evaluator.epochs);
      p.get_double(o, "evaluator.learning_rate", cfg.evaluator.learning_rate);
      p.get_bool(o, "evaluator.augment_concatenated", cfg.evaluator.augment_concatenated);
    }
  }

  if (root.contains("compress")) {
    const json& o = root.at("compress");
    if (!o.is_object()) {
      p.errors.push_back("compress must be an object");
    } else {
      p.unknown_keys(o, "compress",
                     {"max_pieces", "step", "max_tokens", "document_order", "workers",
                      "evaluator", "threshold"});
      p.get_size(o, "compress.max_pieces", cfg.compress.max_pieces);
      p.get_size(o, "compress.step", cfg.compress.step);
      p.get_opt_size(o, "compress.max_tokens", cfg.compress.max_tokens);
      p.get_bool(o, "compress.document_order", cfg.compress.document_order);
      p.get_int(o, "compress.workers", cfg.compress.workers);
      p.get_string(o, "compress.evaluator", cfg.compress.evaluator);
      p.get_double(o, "compress.threshold", cfg.compress.threshold);
    }
  }

  cfg.bench.strategies = default_strategies();
  if (root.contains("bench")) {
    const json& o = root.at("bench");
    if (!o.is_object()) {
      p.errors.push_back("bench must be an object");
    } else {
      p.unknown_keys(o, "bench", {"strategies", "ndcg_cutoffs", "match", "template"});
      p.get_string(o, "bench.match", cfg.bench.match);
      p.get_string(o, "bench.template", cfg.bench.template_id);
      if (o.contains("ndcg_cutoffs")) {
        const json& v = o.at("ndcg_cutoffs");
        if (!v.is_array()) {
          p.errors.push_back("bench.ndcg_cutoffs must be an array of positive integers");
        } else {
          cfg.bench.ndcg_cutoffs.clear();
          for (const auto& item : v) {
            if (!item.is_number_integer() || item.get<long long>() < 1) {
              p.errors.push_back("bench.ndcg_cutoffs must contain positive integers");
              break;
            }
            cfg.bench.ndcg_cutoffs.push_back(item.get<std::size_t>());
          }
        }
      }
      if (o.contains("strategies")) {
        const json& v = o.at("strategies");
        if (!v.is_array()) {
          p.errors.push_back("bench.strategies must be an array");
        } else {
          cfg.bench.strategies.clear();
          std::size_t index = 0;
          for (const auto& item : v) {
            const std::string where = "bench.strategies[" + std::to_string(index) + "]";
            if (!item.is_object()) {
              p.errors.push_back(where + " must be an object");
              ++index;
              continue;
            }
            p.unknown_keys(item, where,
                           {"name", "kind", "topk", "threshold", "max_pieces", "step",
                            "max_tokens"});
            StrategyConfig s;
            p.get_string(item, where + ".name", s.name);
            p.get_string(item, where + ".kind", s.kind);
            p.get_size(item, where + ".topk", s.topk);
            p.get_double(item, where + ".threshold", s.threshold);
            p.get_opt_size(item, where + ".max_pieces", s.max_pieces);
            p.get_opt_size(item, where + ".step", s.step);
            p.get_opt_size(item, where + ".max_tokens", s.max_tokens);
            cfg.bench.strategies.push_back(std::move(s));
            ++index;
          }
        }
      }
    }
  }

  if (root.contains("tokenizer")) {
    const json& o = root.at("tokenizer");
    if (!o.is_object()) {
      p.errors.push_back("tokenizer must be an object");
    } else {
      p.unknown_keys(o, "tokenizer", {"mode", "lowercase"});
      std::string mode = "whitespace_punct";
      p.get_string(o, "tokenizer.mode", mode);
      if (mode == "whitespace_punct") {
        cfg.tokenizer.mode = TokenizerMode::WhitespacePunct;
      } else if (mode == "whitespace") {
        cfg.tokenizer.mode = TokenizerMode::Whitespace;
      } else {
        p.check_enum("tokenizer.mode", mode, {"whitespace_punct", "whitespace"});
      }
      p.get_bool(o, "tokenizer.lowercase", cfg.tokenizer.lowercase);
    }
  }

  p.get_u64(root, "seed", cfg.seed);
  p.get_bool(root, "strict", cfg.strict);

  // Semantic checks on whatever parsed cleanly.
  p.check_enum("oracle.mode", cfg.oracle.mode, {"scripted", "http"});
  p.check_enum("miner.anchor", cfg.miner.anchor, {"first_strong", "all_strong"});
  p.check_enum("miner.match", cfg.miner.match, {"containment", "exact"});
  p.check_enum("encoder.optimizer", cfg.encoder.optimizer, {"sgd", "momentum"});
  p.check_enum("compress.evaluator", cfg.compress.evaluator,
               {"classifier", "oracle", "threshold"});
  p.check_enum("bench.match", cfg.bench.match, {"containment", "exact"});
  for (const auto& s : cfg.bench.strategies) {
    p.check_enum("bench.strategies kind", s.kind,
                 {"no_compression", "closed_book", "topk_truncation", "threshold",
                  "ecorag_adaptive"});
  }
  if (!(cfg.encoder.tau > 0.0)) p.errors.push_back("encoder.tau must be positive");
  if (cfg.encoder.epochs == 0) p.errors.push_back("encoder.epochs must be positive");
  if (!(cfg.encoder.learning_rate > 0.0)) {
    p.errors.push_back("encoder.learning_rate must be positive");
  }
  if (cfg.encoder.weak_fraction < 0.0 || cfg.encoder.weak_fraction > 1.0) {
    p.errors.push_back("encoder.weak_fraction must be in [0,1]");
  }
  if (cfg.encoder.dim == 0) p.errors.push_back("encoder.dim must be positive");
  if (cfg.encoder.bucket_count == 0) {
    p.errors.push_back("encoder.bucket_count must be positive");
  }
  if (cfg.encoder.positives_per_batch == 0) {
    p.errors.push_back("encoder.positives_per_batch must be positive");
  }
  if (cfg.encoder.negatives_per_batch == 0) {
    p.errors.push_back("encoder.negatives_per_batch must be positive");
  }
  if (cfg.evaluator.ratio == 0) p.errors.push_back("evaluator.ratio must be positive");
  if (cfg.evaluator.epochs == 0) {
    p.errors.push_back("evaluator.epochs must be positive");
  }
  if (!(cfg.evaluator.learning_rate > 0.0)) {
    p.errors.push_back("evaluator.learning_rate must be positive");
  }
  if (cfg.compress.max_pieces == 0) {
    p.errors.push_back("compress.max_pieces must be positive");
  }
  if (cfg.compress.step == 0) {
    p.errors.push_back("compress.step must be positive");
  } else if (cfg.compress.step > cfg.compress.max_pieces && cfg.compress.max_pieces > 0) {
    p.errors.push_back("compress.step must not exceed compress.max_pieces");
  }
  if (cfg.compress.workers < 1) p.errors.push_back("compress.workers must be >= 1");
  if (cfg.miner.workers < 1) p.errors.push_back("miner.workers must be >= 1");
  if (cfg.oracle.timeout_ms <= 0) p.errors.push_back("oracle.timeout_ms must be positive");
  if (cfg.oracle.retries < 1) p.errors.push_back("oracle.retries must be >= 1");
  if (cfg.oracle.backoff_ms < 0) p.errors.push_back("oracle.backoff_ms must be >= 0");
  if (cfg.oracle.in_flight_limit < 1) {
    p.errors.push_back("oracle.in_flight_limit must be >= 1");
  }
  {
    std::set<std::string> names;
    for (const auto& s : cfg.bench.strategies) {
      const std::string name = s.name.empty() ? s.kind : s.name;
      if (!names.insert(name).second) {
        p.errors.push_back("bench.strategies names must be unique (duplicate \"" + name +
                           "\")");
      }
    }
  }

  if (!p.errors.empty()) throw ConfigError(std::move(p.errors));
  return cfg;
}

void validate_oracle_config(const OracleConfig& oracle) {
  std::vector<std::string> errors;
  if (oracle.mode == "scripted" && oracle.script.empty()) {
    errors.push_back("oracle.script is required in scripted mode");
  }
  if (oracle.mode == "http" && oracle.base_url.empty()) {
    errors.push_back("oracle.base_url is required in http mode");
  }
  if (oracle.mode == "http" && oracle.model.empty()) {
    errors.push_back("oracle.model is required in http mode");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file: " + path});
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError({std::string("config file is not valid JSON: ") + e.what()});
  }
  return parse_config(root);
}

json config_to_json(const RunConfig& cfg) {
  json root;
  root["paths"] = {{"dataset", cfg.paths.dataset},
                   {"mined", cfg.paths.mined},
                   {"cache", cfg.paths.cache},
                   {"encoder_model", cfg.paths.encoder_model},
                   {"evaluator_model", cfg.paths.evaluator_model},
                   {"compressed", cfg.paths.compressed},
                   {"report_dir", cfg.paths.report_dir}};
  root["oracle"] = {{"mode", cfg.oracle.mode},
                    {"script", cfg.oracle.script},
                    {"base_url", cfg.oracle.base_url},
                    {"model", cfg.oracle.model},
                    {"timeout_ms", cfg.oracle.timeout_ms},
                    {"retries", cfg.oracle.retries},
                    {"backoff_ms", cfg.oracle.backoff_ms},
                    {"in_flight_limit", cfg.oracle.in_flight_limit}};
  root["miner"] = {{"anchor", cfg.miner.anchor},
                   {"match", cfg.miner.match},
                   {"template", cfg.miner.template_id},
                   {"workers", cfg.miner.workers}};
  root["encoder"] = {{"tau", cfg.encoder.tau},
                     {"learning_rate", cfg.encoder.learning_rate},
                     {"epochs", cfg.encoder.epochs},
                     {"weak_fraction", cfg.encoder.weak_fraction},
                     {"optimizer", cfg.encoder.optimizer},
                     {"momentum", cfg.encoder.momentum},
                     {"positives_per_batch", cfg.encoder.positives_per_batch},
                     {"negatives_per_batch", cfg.encoder.negatives_per_batch},
                     {"dim", cfg.encoder.dim},
                     {"bucket_count", cfg.encoder.bucket_count},
                     {"hash_seed", cfg.encoder.hash_seed},
                     {"init_scale", cfg.encoder.init_scale}};
  root["evaluator"] = {{"ratio", cfg.evaluator.ratio},
                       {"epochs", cfg.evaluator.epochs},
                       {"learning_rate", cfg.evaluator.learning_rate},
                       {"augment_concatenated", cfg.evaluator.augment_concatenated}};
  root["compress"] = {{"max_pieces", cfg.compress.max_pieces},
                      {"step", cfg.compress.step},
                      {"max_tokens", cfg.compress.max_tokens
                                         ? json(*cfg.compress.max_tokens)
                                         : json(nullptr)},
                      {"document_order", cfg.compress.document_order},
                      {"workers", cfg.compress.workers},
                      {"evaluator", cfg.compress.evaluator},
                      {"threshold", cfg.compress.threshold}};
  json strategies = json::array();
  for (const auto& s : cfg.bench.strategies) {
    json item;
    item["name"] = s.name;
    item["kind"] = s.kind;
    item["topk"] = s.topk;
    item["threshold"] = s.threshold;
    item["max_pieces"] = s.max_pieces ? json(*s.max_pieces) : json(nullptr);
    item["step"] = s.step ? json(*s.step) : json(nullptr);
    item["max_tokens"] = s.max_tokens ? json(*s.max_tokens) : json(nullptr);
    strategies.push_back(std::move(item));
  }
  root["bench"] = {{"strategies", std::move(strategies)},
                   {"ndcg_cutoffs", cfg.bench.ndcg_cutoffs},
                   {"match", cfg.bench.match},
                   {"template", cfg.bench.template_id}};
  root["tokenizer"] = {
      {"mode", cfg.tokenizer.mode == TokenizerMode::WhitespacePunct ? "whitespace_punct"
                                                                    : "whitespace"},
      {"lowercase", cfg.tokenizer.lowercase}};
  root["seed"] = cfg.seed;
  root["strict"] = cfg.strict;
  return root;
}

void set_dotted_key(json& root, const std::string& dotted, const std::string& raw_value) {
  json value;
  try {
    value = json::parse(raw_value);
  } catch (const json::exception&) {
    value = raw_value;  // not JSON -> plain string
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot - start);
    if (part.empty()) throw ConfigError({"empty segment in config key: " + dotted});
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

const std::vector<ConfigKeyDoc>& config_key_docs() {
  static const std::vector<ConfigKeyDoc> docs = {
      {"paths.dataset", "question/document dataset, JSON lines (required)"},
      {"paths.mined", "evidentiality labels file (default mined.jsonl)"},
      {"paths.cache", "oracle response cache, JSON lines; empty disables (default empty)"},
      {"paths.encoder_model", "encoder weights file (default encoder.bin)"},
      {"paths.evaluator_model", "evaluator weights file (default evaluator.bin)"},
      {"paths.compressed", "compression output file (default compressed.jsonl)"},
      {"paths.report_dir", "benchmark report directory (default reports)"},
      {"oracle.mode", "scripted | http (default scripted)"},
      {"oracle.script", "scripted answer table JSON; required in scripted mode"},
      {"oracle.base_url", "chat-completions endpoint base URL; required in http mode"},
      {"oracle.model", "model name sent to the endpoint; required in http mode"},
      {"oracle.timeout_ms", "HTTP timeout per request (default 30000)"},
      {"oracle.retries", "HTTP attempts before giving up (default 3)"},
      {"oracle.backoff_ms", "base retry backoff, doubles per attempt (default 500)"},
      {"oracle.in_flight_limit", "max concurrent HTTP requests (default 4)"},
      {"miner.anchor", "first_strong | all_strong probe anchor (default first_strong)"},
      {"miner.match", "containment | exact answer check (default containment)"},
      {"miner.template", "prompt template id (default qa-fewshot-v1)"},
      {"miner.workers", "questions mined in parallel (default 1)"},
      {"encoder.tau", "contrastive softmax temperature (default 1.0)"},
      {"encoder.learning_rate", "SGD step size (default 0.01)"},
      {"encoder.epochs", "training epochs (default 10)"},
      {"encoder.weak_fraction",
       "share of weak sentences in the negative pool (default 0.15)"},
      {"encoder.optimizer", "sgd | momentum (default sgd)"},
      {"encoder.momentum", "momentum coefficient when optimizer=momentum (default 0.9)"},
      {"encoder.positives_per_batch", "strong positives per question batch (default 8)"},
      {"encoder.negatives_per_batch", "negatives per question batch (default 56)"},
      {"encoder.dim", "embedding width (default 64)"},
      {"encoder.bucket_count", "hash buckets per table (default 65536)"},
      {"encoder.hash_seed", "token hash seed (default 0)"},
      {"encoder.init_scale", "uniform init range half-width (default 0.1)"},
      {"evaluator.ratio", "negatives per positive in the trainset (default 3)"},
      {"evaluator.epochs", "full-batch descent steps (default 200)"},
      {"evaluator.learning_rate", "descent step size (default 0.5)"},
      {"evaluator.augment_concatenated",
       "also train on concatenated contexts (default false)"},
      {"compress.max_pieces", "selection size cap (default 20)"},
      {"compress.step", "pieces added per reflection round (default 4)"},
      {"compress.max_tokens", "token budget, null disables (default null)"},
      {"compress.document_order",
       "join selected sentences in corpus order (default false)"},
      {"compress.workers", "questions compressed in parallel (default 1)"},
      {"compress.evaluator", "classifier | oracle | threshold (default classifier)"},
      {"compress.threshold", "score cutoff for the threshold evaluator (default 0.0)"},
      {"bench.strategies",
       "JSON array of strategy objects {name,kind,topk,threshold,max_pieces,step,"
       "max_tokens}; default compares no_compression, closed_book, topk_truncation, "
       "ecorag_adaptive"},
      {"bench.ndcg_cutoffs", "JSON array of ranking cutoffs (default [1,10])"},
      {"bench.match", "containment | exact answer check (default containment)"},
      {"bench.template", "prompt template id (default qa-fewshot-v1)"},
      {"tokenizer.mode", "whitespace_punct | whitespace (default whitespace_punct)"},
      {"tokenizer.lowercase", "lowercase before token counting (default false)"},
      {"seed", "RNG seed for training and shuffling (default 0)"},
      {"strict", "abort on the first bad record instead of skipping (default false)"},
  };
  return docs;
}

TrainConfig encoder_train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.tau = cfg.encoder.tau;
  tc.learning_rate = cfg.encoder.learning_rate;
  tc.epochs = cfg.encoder.epochs;
  tc.weak_fraction_in_se_negatives = cfg.encoder.weak_fraction;
  tc.seed = cfg.seed;
  tc.optimizer = cfg.encoder.optimizer == "momentum" ? TrainConfig::Optimizer::MomentumSgd
                                                     : TrainConfig::Optimizer::Sgd;
  tc.momentum = cfg.encoder.momentum;
  tc.positives_per_batch = cfg.encoder.positives_per_batch;
  tc.negatives_per_batch = cfg.encoder.negatives_per_batch;
  tc.dim = cfg.encoder.dim;
  tc.bucket_count = cfg.encoder.bucket_count;
  tc.hash_seed = cfg.encoder.hash_seed;
  tc.init_scale = cfg.encoder.init_scale;
  return tc;
}

EvaluatorTrainConfig evaluator_train_config(const RunConfig& cfg) {
  EvaluatorTrainConfig tc;
  tc.epochs = cfg.evaluator.epochs;
  tc.learning_rate = cfg.evaluator.learning_rate;
  tc.seed = cfg.seed;
  return tc;
}

CompressionLimits compression_limits(const CompressConfig& compress) {
  CompressionLimits limits;
  limits.max_pieces = compress.max_pieces;
  limits.step = compress.step;
  limits.max_tokens = compress.max_tokens;
  return limits;
}

MinerOptions miner_options(const MinerConfig& miner) {
  MinerOptions options;
  options.anchor = miner.anchor == "all_strong" ? AnchorPolicy::AllStrong
                                                : AnchorPolicy::FirstStrong;
  options.match = match_mode_from_name(miner.match);
  options.template_id = miner.template_id;
  return options;
}

MatchMode match_mode_from_name(const std::string& name) {
  if (name == "containment") return MatchMode::Containment;
  if (name == "exact") return MatchMode::Exact;
  throw std::runtime_error("unknown match mode: " + name);
}

std::vector<StrategySpec> bench_strategies(const RunConfig& cfg) {
  std::vector<StrategySpec> specs;
  for (const auto& s : cfg.bench.strategies) {
    StrategySpec spec;
    spec.name = s.name.empty() ? s.kind : s.name;
    spec.kind = strategy_kind_from_name(s.kind);
    spec.topk = s.topk;
    spec.threshold = s.threshold;
    spec.limits = compression_limits(cfg.compress);
    if (s.max_pieces) spec.limits.max_pieces = *s.max_pieces;
    if (s.step) spec.limits.step = *s.step;
    if (s.max_tokens) spec.limits.max_tokens = *s.max_tokens;
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace ecorag
