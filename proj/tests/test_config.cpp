#include <doctest.h>

#include <string>
#include <vector>

#include <json.hpp>

#include "ecorag/config.hpp"

using namespace ecorag;
using nlohmann::json;

TEST_CASE("an empty object parses to the documented defaults") {
  const RunConfig cfg = parse_config(json::object());
  CHECK(cfg.paths.mined == "mined.jsonl");
  CHECK(cfg.paths.encoder_model == "encoder.bin");
  CHECK(cfg.paths.report_dir == "reports");
  CHECK(cfg.oracle.mode == "scripted");
  CHECK(cfg.oracle.timeout_ms == 30000);
  CHECK(cfg.oracle.retries == 3);
  CHECK(cfg.miner.anchor == "first_strong");
  CHECK(cfg.miner.workers == 1);
  CHECK(cfg.encoder.tau == 1.0);
  CHECK(cfg.encoder.epochs == 10);
  CHECK(cfg.encoder.weak_fraction == 0.15);
  CHECK(cfg.encoder.positives_per_batch == 8);
  CHECK(cfg.encoder.negatives_per_batch == 56);
  CHECK(cfg.encoder.dim == 64);
  CHECK(cfg.encoder.bucket_count == 65536);
  CHECK(cfg.evaluator.ratio == 3);
  CHECK(cfg.evaluator.epochs == 200);
  CHECK(cfg.compress.max_pieces == 20);
  CHECK(cfg.compress.step == 4);
  CHECK_FALSE(cfg.compress.max_tokens.has_value());
  CHECK(cfg.compress.evaluator == "classifier");
  CHECK(cfg.bench.ndcg_cutoffs == std::vector<std::size_t>{1, 10});
  REQUIRE(cfg.bench.strategies.size() == 4);
  CHECK(cfg.seed == 0);
  CHECK_FALSE(cfg.strict);
}

TEST_CASE("every problem is reported at once, not just the first") {
  json bad = json::object();
  bad["oracle"] = {{"mode", "smoke-signals"}};
  bad["miner"] = {{"anchor", "best"}, {"mystery", 1}};
  bad["compress"] = {{"max_pieces", 2}, {"step", 9}};
  bad["encoder"] = {{"tau", "hot"}};

  try {
    parse_config(bad);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.messages().size() >= 4);
    const std::string what = e.what();
    CHECK(what.find("oracle.mode") != std::string::npos);
    CHECK(what.find("miner.anchor") != std::string::npos);
    CHECK(what.find("miner.mystery") != std::string::npos);
    CHECK(what.find("step") != std::string::npos);
    CHECK(what.find("encoder.tau") != std::string::npos);
  }
}

TEST_CASE("unknown sections and keys are rejected") {
  CHECK_THROWS_AS(parse_config(json{{"surprise", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"paths", {{"dataset", "x"}, {"extra", "y"}}}}),
                  ConfigError);
}

TEST_CASE("mode-dependent requirements bind when an oracle is built") {
  // Parsing alone never demands oracle files: commands that do not call an
  // oracle must work without them.
  const RunConfig scripted = parse_config(json::object());
  CHECK_THROWS_AS(validate_oracle_config(scripted.oracle), ConfigError);

  json with_script = json::object();
  with_script["oracle"] = {{"script", "answers.json"}};
  CHECK_NOTHROW(validate_oracle_config(parse_config(with_script).oracle));

  json http_missing = json::object();
  http_missing["oracle"] = {{"mode", "http"}};
  const RunConfig http_cfg = parse_config(http_missing);
  try {
    validate_oracle_config(http_cfg.oracle);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.messages().size() == 2);  // base_url and model both missing
  }

  json http_ok = json::object();
  http_ok["oracle"] = {{"mode", "http"},
                       {"base_url", "http://localhost:1234"},
                       {"model", "m"}};
  CHECK_NOTHROW(validate_oracle_config(parse_config(http_ok).oracle));
}

TEST_CASE("strategy validation") {
  json dup = json::object();
  dup["bench"] = {{"strategies", json::array({json{{"kind", "closed_book"}},
                                              json{{"kind", "closed_book"}}})}};
  CHECK_THROWS_AS(parse_config(dup), ConfigError);

  json named = json::object();
  named["bench"] = {{"strategies",
                     json::array({json{{"kind", "closed_book"}, {"name", "a"}},
                                  json{{"kind", "closed_book"}, {"name", "b"}},
                                  json{{"kind", "ecorag_adaptive"},
                                       {"max_pieces", 12},
                                       {"step", 3},
                                       {"max_tokens", 99}}})}};
  const RunConfig cfg = parse_config(named);
  const auto specs = bench_strategies(cfg);
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].name == "a");
  CHECK(specs[1].name == "b");
  CHECK(specs[2].name == "ecorag_adaptive");
  CHECK(specs[2].limits.max_pieces == 12);
  CHECK(specs[2].limits.step == 3);
  REQUIRE(specs[2].limits.max_tokens.has_value());
  CHECK(*specs[2].limits.max_tokens == 99);

  json bad_kind = json::object();
  bad_kind["bench"] = {{"strategies", json::array({json{{"kind", "telepathy"}}})}};
  CHECK_THROWS_AS(parse_config(bad_kind), ConfigError);
}

TEST_CASE("strategies inherit the compress section limits unless overridden") {
  json root = json::object();
  root["compress"] = {{"max_pieces", 10}, {"step", 2}, {"max_tokens", 50}};
  root["bench"] = {{"strategies", json::array({json{{"kind", "ecorag_adaptive"}}})}};
  const RunConfig cfg = parse_config(root);
  const auto specs = bench_strategies(cfg);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].limits.max_pieces == 10);
  CHECK(specs[0].limits.step == 2);
  REQUIRE(specs[0].limits.max_tokens.has_value());
  CHECK(*specs[0].limits.max_tokens == 50);
}

TEST_CASE("dotted overrides build nested values and parse JSON when they can") {
  json root = json::object();
  set_dotted_key(root, "encoder.epochs", "25");
  set_dotted_key(root, "paths.dataset", "data/in.jsonl");  // stays a string
  set_dotted_key(root, "compress.document_order", "true");
  set_dotted_key(root, "bench.ndcg_cutoffs", "[1,3,7]");
  set_dotted_key(root, "oracle.script", "oracle.json");

  const RunConfig cfg = parse_config(root);
  CHECK(cfg.encoder.epochs == 25);
  CHECK(cfg.paths.dataset == "data/in.jsonl");
  CHECK(cfg.compress.document_order);
  CHECK(cfg.bench.ndcg_cutoffs == std::vector<std::size_t>{1, 3, 7});
  CHECK(cfg.oracle.script == "oracle.json");

  // Later writes win: flag-over-file precedence is just write order.
  set_dotted_key(root, "encoder.epochs", "3");
  CHECK(parse_config(root).encoder.epochs == 3);

  CHECK_THROWS_AS(set_dotted_key(root, "encoder..epochs", "1"), ConfigError);
}

TEST_CASE("config round-trips through its JSON form") {
  json root = json::object();
  set_dotted_key(root, "encoder.dim", "16");
  set_dotted_key(root, "compress.max_tokens", "77");
  set_dotted_key(root, "miner.match", "exact");
  set_dotted_key(root, "tokenizer.lowercase", "true");
  const RunConfig cfg = parse_config(root);

  const RunConfig again = parse_config(config_to_json(cfg));
  CHECK(again.encoder.dim == 16);
  REQUIRE(again.compress.max_tokens.has_value());
  CHECK(*again.compress.max_tokens == 77);
  CHECK(again.miner.match == "exact");
  CHECK(again.tokenizer.lowercase);
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("documented keys all round-trip through the config tree") {
  const json defaults = config_to_json(parse_config(json::object()));
  for (const auto& doc : config_key_docs()) {
    CAPTURE(doc.key);
    CHECK_FALSE(doc.doc.empty());
    // Every documented key path must exist in the serialized config.
    const json* node = &defaults;
    std::string rest = doc.key;
    bool found = true;
    while (!rest.empty()) {
      const auto dot = rest.find('.');
      const std::string head = rest.substr(0, dot);
      rest = dot == std::string::npos ? "" : rest.substr(dot + 1);
      if (!node->is_object() || !node->contains(head)) {
        found = false;
        break;
      }
      node = &(*node)[head];
    }
    CHECK(found);
  }
}

TEST_CASE("adapters translate names into typed options") {
  json root = json::object();
  set_dotted_key(root, "encoder.optimizer", "momentum");
  set_dotted_key(root, "encoder.tau", "0.5");
  set_dotted_key(root, "encoder.learning_rate", "0.25");
  set_dotted_key(root, "seed", "9");
  set_dotted_key(root, "miner.anchor", "all_strong");
  set_dotted_key(root, "miner.match", "exact");
  const RunConfig cfg = parse_config(root);

  const TrainConfig tc = encoder_train_config(cfg);
  CHECK(tc.optimizer == TrainConfig::Optimizer::MomentumSgd);
  CHECK(tc.tau == 0.5);
  CHECK(tc.learning_rate == 0.25);
  CHECK(tc.seed == 9);

  const MinerOptions mo = miner_options(cfg.miner);
  CHECK(mo.anchor == AnchorPolicy::AllStrong);
  CHECK(mo.match == MatchMode::Exact);

  CHECK(match_mode_from_name("containment") == MatchMode::Containment);
  CHECK(match_mode_from_name("exact") == MatchMode::Exact);
  CHECK_THROWS_AS(match_mode_from_name("fuzzy"), std::runtime_error);

  const EvaluatorTrainConfig ec = evaluator_train_config(cfg);
  CHECK(ec.epochs == 200);
  const CompressionLimits cl = compression_limits(cfg.compress);
  CHECK(cl.max_pieces == 20);
}

TEST_CASE("negative and zero values are rejected where meaningless") {
  CHECK_THROWS_AS(parse_config(json{{"encoder", {{"epochs", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"encoder", {{"tau", 0.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"encoder", {{"dim", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"compress", {{"max_pieces", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"compress", {{"max_tokens", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"miner", {{"workers", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"oracle", {{"retries", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"evaluator", {{"ratio", 0}}}}), ConfigError);
}
