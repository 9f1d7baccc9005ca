#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecorag/oracle.hpp"

using namespace ecorag;
using nlohmann::json;

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("oracle_test_" + name) {
    std::remove(path.c_str());
  }
  ~TempPath() { std::remove(path.c_str()); }
};

class CountingOracle final : public Oracle {
 public:
  AnswerAttempt generate(const OracleRequest& request) override {
    ++calls;
    AnswerAttempt a;
    a.raw_text = "answer to " + request.question +
                 (request.context ? " with " + *request.context : " closed");
    return a;
  }
  int calls = 0;
};

class FakeTransport final : public HttpTransport {
 public:
  std::vector<HttpResponse> responses;  // consumed front to back
  std::vector<std::string> bodies;
  std::vector<std::vector<std::pair<std::string, std::string>>> headers;
  std::vector<std::string> paths;

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& hs) override {
    paths.push_back(path);
    bodies.push_back(body);
    headers.push_back(hs);
    if (responses.empty()) return {0, ""};
    HttpResponse r = responses.front();
    responses.erase(responses.begin());
    return r;
  }
};

std::string chat_body(const std::string& content) {
  json j;
  j["choices"] = json::array({json{{"message", json{{"content", content}}}}});
  return j.dump();
}

}  // namespace

TEST_CASE("builtin template renders question and context") {
  const std::string open = render_prompt("qa-fewshot-v1", "who wrote it",
                                         std::optional<std::string>("some context"));
  CHECK(open.find("who wrote it") != std::string::npos);
  CHECK(open.find("some context") != std::string::npos);

  const std::string closed = render_prompt("qa-fewshot-v1", "who wrote it", std::nullopt);
  CHECK(closed.find("who wrote it") != std::string::npos);
  CHECK(closed.find("some context") == std::string::npos);
  // The whole documents line disappears, not just the placeholder.
  CHECK(closed.find("{documents}") == std::string::npos);

  CHECK_THROWS_AS(render_prompt("no-such-template", "q", std::nullopt),
                  std::runtime_error);
}

TEST_CASE("scripted oracle follows closed-book, rules, and defaults") {
  ScriptedOracle oracle("fallback");
  ScriptedEntry entry;
  entry.closed_book_answer = "paris";
  entry.default_answer = "dunno";
  entry.rules.push_back({{}, std::string("clue"), {"trap"}, "london"});
  entry.rules.push_back({{"alpha", "beta"}, std::nullopt, {}, "rome"});
  oracle.add_question("q1", entry);

  auto ask = [&](std::optional<std::string> context) {
    OracleRequest request;
    request.question = "q1";
    request.context = std::move(context);
    return oracle.generate(request).raw_text;
  };

  CHECK(ask(std::nullopt) == "paris");                  // closed book
  CHECK(ask("has the clue inside") == "london");        // evidence rule
  CHECK(ask("trap before the clue") == "dunno");        // decoy ahead of evidence
  CHECK(ask("clue then trap later") == "london");       // decoy after evidence is fine
  CHECK(ask("beta comes after alpha") == "rome");       // contains_all rule
  CHECK(ask("only alpha here") == "dunno");             // partial contains_all
  CHECK(ask("nothing relevant") == "dunno");            // entry default

  OracleRequest other;
  other.question = "unseen";
  other.context = "whatever";
  CHECK(oracle.generate(other).raw_text == "fallback");  // global default

  OracleRequest bad;
  bad.question = "q1";
  bad.template_id = "no-such-template";
  CHECK_THROWS_AS(oracle.generate(bad), std::runtime_error);
}

TEST_CASE("first matching rule wins") {
  ScriptedOracle oracle;
  ScriptedEntry entry;
  entry.rules.push_back({{"x"}, std::nullopt, {}, "first"});
  entry.rules.push_back({{"x"}, std::nullopt, {}, "second"});
  oracle.add_question("q", entry);
  OracleRequest request;
  request.question = "q";
  request.context = "x marks the spot";
  CHECK(oracle.generate(request).raw_text == "first");
}

TEST_CASE("scripted oracle JSON round trip") {
  ScriptedOracle oracle("unknown");
  ScriptedEntry entry;
  entry.closed_book_answer = "cb";
  entry.default_answer = "dflt";
  entry.rules.push_back({{"a"}, std::string("ev"), {"d1", "d2"}, "ans"});
  oracle.add_question("the question", entry);

  TempPath file("script.json");
  {
    std::ofstream out(file.path);
    out << oracle.to_json();
  }
  ScriptedOracle loaded = ScriptedOracle::from_json_file(file.path);

  OracleRequest request;
  request.question = "the question";
  CHECK(loaded.generate(request).raw_text == "cb");
  request.context = "a ev";
  CHECK(loaded.generate(request).raw_text == "ans");
  request.context = "a d2 ev";
  CHECK(loaded.generate(request).raw_text == "dflt");
}

TEST_CASE("http oracle parses a chat completion and sends auth") {
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* raw = transport.get();
  raw->responses.push_back({200, chat_body("the answer")});

  HttpOracleConfig cfg;
  cfg.base_url = "http://example.test";
  cfg.model = "demo-model";
  cfg.api_key = "sekret";
  HttpOracle oracle(std::move(transport), cfg);
  oracle.sleep_ms = [](int) {};

  OracleRequest request;
  request.question = "what is it";
  request.context = "ctx here";
  AnswerAttempt attempt = oracle.generate(request);

  CHECK(attempt.raw_text == "the answer");
  CHECK(attempt.source == AnswerAttempt::Source::Http);
  REQUIRE(raw->paths.size() == 1);
  CHECK(raw->paths[0] == "/v1/chat/completions");

  const json sent = json::parse(raw->bodies[0]);
  CHECK(sent["model"] == "demo-model");
  const std::string content = sent["messages"][0]["content"].get<std::string>();
  CHECK(content.find("what is it") != std::string::npos);
  CHECK(content.find("ctx here") != std::string::npos);

  bool auth_found = false;
  for (const auto& [k, v] : raw->headers[0]) {
    if (k == "Authorization" && v == "Bearer sekret") auth_found = true;
  }
  CHECK(auth_found);
}

TEST_CASE("http oracle retries with doubling backoff then succeeds") {
  auto transport = std::make_unique<FakeTransport>();
  FakeTransport* raw = transport.get();
  raw->responses.push_back({500, "oops"});
  raw->responses.push_back({503, "busy"});
  raw->responses.push_back({200, chat_body("late answer")});

  HttpOracleConfig cfg;
  cfg.model = "m";
  cfg.retries = 3;
  cfg.backoff_ms = 100;
  HttpOracle oracle(std::move(transport), cfg);
  std::vector<int> sleeps;
  oracle.sleep_ms = [&sleeps](int ms) { sleeps.push_back(ms); };

  OracleRequest request;
  request.question = "q";
  CHECK(oracle.generate(request).raw_text == "late answer");
  CHECK(raw->bodies.size() == 3);
  CHECK(sleeps == std::vector<int>{100, 200});
}

TEST_CASE("http oracle gives up after the retry budget") {
  auto transport = std::make_unique<FakeTransport>();
  transport->responses = {{500, ""}, {500, ""}, {500, ""}};
  HttpOracleConfig cfg;
  cfg.model = "m";
  cfg.retries = 3;
  HttpOracle oracle(std::move(transport), cfg);
  oracle.sleep_ms = [](int) {};

  OracleRequest request;
  request.question = "q";
  CHECK_THROWS_WITH_AS(oracle.generate(request),
                       "oracle transport failed after 3 attempts (last status 500)",
                       std::runtime_error);
}

TEST_CASE("malformed completion body is an error, not a retry") {
  auto transport = std::make_unique<FakeTransport>();
  transport->responses = {{200, "not json"}};
  HttpOracleConfig cfg;
  cfg.model = "m";
  HttpOracle oracle(std::move(transport), cfg);
  oracle.sleep_ms = [](int) {};
  OracleRequest request;
  request.question = "q";
  CHECK_THROWS_AS(oracle.generate(request), std::runtime_error);
}

TEST_CASE("caching oracle serves repeats and warm starts from disk") {
  TempPath file("cache.jsonl");
  CountingOracle inner;

  OracleRequest request;
  request.question = "q";
  request.context = "ctx";

  {
    CachingOracle cache(inner, file.path);
    AnswerAttempt first = cache.generate(request);
    CHECK(first.source == AnswerAttempt::Source::Scripted);
    AnswerAttempt again = cache.generate(request);
    CHECK(again.source == AnswerAttempt::Source::Cache);
    CHECK(again.raw_text == first.raw_text);
    CHECK(inner.calls == 1);
    CHECK(cache.hits() == 1);
    CHECK(cache.forwarded() == 1);

    // A different context is a different request.
    OracleRequest other = request;
    other.context = "other ctx";
    cache.generate(other);
    CHECK(inner.calls == 2);
  }

  // Fresh instance over the same file: warm cache, zero inner calls.
  CountingOracle inner2;
  CachingOracle warm(inner2, file.path);
  AnswerAttempt warm_hit = warm.generate(request);
  CHECK(warm_hit.source == AnswerAttempt::Source::Cache);
  CHECK(inner2.calls == 0);
  CHECK(warm.hits() == 1);
}

TEST_CASE("closed-book and open-book cache keys differ") {
  OracleRequest open;
  open.question = "q";
  open.context = "";
  OracleRequest closed;
  closed.question = "q";
  CHECK(CachingOracle::request_key(open) != CachingOracle::request_key(closed));
}

TEST_CASE("answer correctness: containment vs exact") {
  AnswerAttempt attempt;
  attempt.raw_text = "It was The Eiffel Tower, of course.";
  const std::vector<std::string> golds = {"Eiffel Tower"};
  CHECK(is_correct(attempt, golds, MatchMode::Containment));
  CHECK_FALSE(is_correct(attempt, golds, MatchMode::Exact));

  AnswerAttempt exact;
  exact.raw_text = "the eiffel tower";
  CHECK(is_correct(exact, golds, MatchMode::Exact));

  AnswerAttempt partial;
  partial.raw_text = "the tower";
  CHECK_FALSE(is_correct(partial, golds, MatchMode::Containment));

  // Token boundaries matter: "towers" does not contain the phrase "tower".
  AnswerAttempt plural;
  plural.raw_text = "eiffel towers";
  CHECK_FALSE(is_correct(plural, golds, MatchMode::Containment));
}
