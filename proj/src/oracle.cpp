#include "ecorag/oracle.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ecorag/util.hpp"

namespace ecorag {

using nlohmann::json;

namespace {

const char* kQaTemplate =
    "who won a million on deal or no deal\n"
    "Answer: Tomorrow Rodriguez\n"
    "\n"
    "who is the woman washing the car in cool hand luke\n"
    "Answer: Joy Harmon\n"
    "\n"
    "who is the actor that plays ragnar on vikings\n"
    "Answer: Travis Fimmel\n"
    "\n"
    "who said it's better to have loved and lost\n"
    "Answer: Alfred , Lord Tennyson\n"
    "\n"
    "name the first indian woman to be crowned as miss world\n"
    "Answer: Reita Faria\n"
    "\n"
    "{documents}\n"
    "{question}\n"
    "Answer: ";

const char* kEvidentialityTemplate =
    "You are an expert at determining whether a document provides evidential "
    "support for a given question. You will receive a question and a document, "
    "and your task is to evaluate whether the document is evidential, partially "
    "evidential, or non-evidential in relation to the question.\n"
    "Assess the support provided by the document using the following scale:\n"
    "- [Evidential] - The document fully supports the question, providing clear "
    "and direct evidence that answers or addresses the query completely.\n"
    "- [Non-Evidential] - The document does not provide relevant information or "
    "evidence related to the question, making it unrelated or insufficient to "
    "support the query.\n"
    "Please provide your assessment and briefly justify your reasoning based on "
    "the content of the document in relation to the question.\n"
    "\n"
    "Question: what is the temperature of dry ice in kelvin?\n"
    "Evidence: At atmospheric pressure, sublimation/deposition occurs at or "
    "194.65 K. The density of dry ice varies, but usually ranges between about.\n"
    "Score: [Evidential]\n"
    "\n"
    "Question: when did north vietnam unify with the south?\n"
    "Evidence: The distinctive synthesizer theme was performed by the "
    "then-little-known Thomas Dolby, and this song also marked a major departure "
    "from their earlier singles because their previous singles were mid to upper "
    "tempo rock songs while this song was a softer love song with the energy of "
    "a power ballad.\n"
    "Score: [Non-Evidential]\n"
    "\n"
    "Question: who played all the carly 's on general hospital?\n"
    "Evidence: Throughout the 2000s, Carly, then Tamara Braun (2001-05) goes on "
    "to become one of the\n"
    "Score: [Non-Evidential]\n"
    "\n"
    "Question: who sang the original blinded by the light?\n"
    "Evidence: Light of Day (song) \"Light of Day\", sometimes written as "
    "\"(Just Around the Corner to the) Light of Day\", is a song written by "
    "Bruce Springsteen and performed initially by Joan Jett and Michael J.\n"
    "Score: [Non-Evidential]\n"
    "\n"
    "Question: who was the rfc editor until 1998 just provide the family name?\n"
    "Evidence: Perhaps his most famous legacy is from RFC 760, which includes a "
    "robustness principle often called \"Postel's law\": \"an implementation\n"
    "Score: [Non-Evidential]\n"
    "\n"
    "Question: {question}\n"
    "Evidence: {documents}\n"
    "Score: ";

// Placeholders present in a template, in order of appearance.
std::vector<std::string> find_placeholders(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t close = text.find('}', i);
    if (close == std::string::npos) break;
    std::string name = text.substr(i + 1, close - i - 1);
    bool word = !name.empty();
    for (char c : name) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') word = false;
    }
    if (word) out.push_back(name);
    i = close;
  }
  return out;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

// Remove the whole line containing `needle`, including its newline.
std::string drop_line_with(std::string text, const std::string& needle) {
  std::size_t pos = text.find(needle);
  if (pos == std::string::npos) return text;
  std::size_t line_start = text.rfind('\n', pos);
  line_start = line_start == std::string::npos ? 0 : line_start + 1;
  std::size_t line_end = text.find('\n', pos);
  line_end = line_end == std::string::npos ? text.size() : line_end + 1;
  text.erase(line_start, line_end - line_start);
  return text;
}

}  // namespace

const TemplateRegistry& TemplateRegistry::builtins() {
  static const TemplateRegistry reg = [] {
    TemplateRegistry r;
    r.add("qa-fewshot-v1", kQaTemplate);
    r.add("evidentiality-v1", kEvidentialityTemplate);
    return r;
  }();
  return reg;
}

void TemplateRegistry::add(const std::string& id, const std::string& text) {
  templates_[id] = text;
}

bool TemplateRegistry::has(const std::string& id) const {
  return templates_.count(id) != 0;
}

std::string TemplateRegistry::render(const std::string& id, const std::string& question,
                                     const std::optional<std::string>& context) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw std::runtime_error("unknown template id: " + id);

  for (const auto& name : find_placeholders(it->second)) {
    if (name != "question" && name != "documents")
      throw std::runtime_error("unresolved placeholder {" + name + "} in template " + id);
  }

  std::string text = it->second;
  if (context.has_value()) {
    text = replace_all(std::move(text), "{documents}", *context);
  } else {
    text = drop_line_with(std::move(text), "{documents}");
  }
  return replace_all(std::move(text), "{question}", question);
}

std::string render_prompt(const std::string& template_id, const std::string& question,
                          const std::optional<std::string>& context) {
  return TemplateRegistry::builtins().render(template_id, question, context);
}

// --- scripted oracle -------------------------------------------------------

bool ContextRule::matches(const std::string& context) const {
  for (const auto& s : contains_all) {
    if (context.find(s) == std::string::npos) return false;
  }
  if (evidence.has_value()) {
    std::size_t evidence_pos = context.find(*evidence);
    if (evidence_pos == std::string::npos) return false;
    for (const auto& decoy : decoys) {
      std::size_t decoy_pos = context.find(decoy);
      if (decoy_pos != std::string::npos && decoy_pos < evidence_pos) return false;
    }
  }
  return true;
}

void ScriptedOracle::add_question(const std::string& question, ScriptedEntry entry) {
  by_question_[question] = std::move(entry);
}

AnswerAttempt ScriptedOracle::generate(const OracleRequest& request) {
  if (!TemplateRegistry::builtins().has(request.template_id))
    throw std::runtime_error("unknown template id: " + request.template_id);

  AnswerAttempt attempt;
  attempt.source = AnswerAttempt::Source::Scripted;

  auto it = by_question_.find(request.question);
  if (it == by_question_.end()) {
    attempt.raw_text = global_default_;
    return attempt;
  }
  const ScriptedEntry& entry = it->second;
  if (!request.context.has_value()) {
    attempt.raw_text = entry.closed_book_answer.empty() ? global_default_
                                                        : entry.closed_book_answer;
    return attempt;
  }
  for (const auto& rule : entry.rules) {
    if (rule.matches(*request.context)) {
      attempt.raw_text = rule.answer;
      return attempt;
    }
  }
  attempt.raw_text = entry.default_answer.empty() ? global_default_ : entry.default_answer;
  return attempt;
}

namespace {

ContextRule rule_from_json(const json& j) {
  ContextRule rule;
  if (j.contains("contains_all"))
    rule.contains_all = j["contains_all"].get<std::vector<std::string>>();
  if (j.contains("evidence")) rule.evidence = j["evidence"].get<std::string>();
  if (j.contains("decoys")) rule.decoys = j["decoys"].get<std::vector<std::string>>();
  rule.answer = j.at("answer").get<std::string>();
  return rule;
}

json rule_to_json(const ContextRule& rule) {
  json j;
  if (!rule.contains_all.empty()) j["contains_all"] = rule.contains_all;
  if (rule.evidence.has_value()) j["evidence"] = *rule.evidence;
  if (!rule.decoys.empty()) j["decoys"] = rule.decoys;
  j["answer"] = rule.answer;
  return j;
}

}  // namespace

ScriptedOracle ScriptedOracle::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scripted oracle file: " + path);
  json j = json::parse(in);

  ScriptedOracle oracle(j.value("default_answer", std::string("unknown")));
  for (const auto& q : j.at("questions")) {
    ScriptedEntry entry;
    entry.closed_book_answer = q.value("closed_book", std::string());
    entry.default_answer = q.value("default", std::string());
    if (q.contains("rules")) {
      for (const auto& r : q["rules"]) entry.rules.push_back(rule_from_json(r));
    }
    oracle.add_question(q.at("question").get<std::string>(), std::move(entry));
  }
  return oracle;
}

std::string ScriptedOracle::to_json() const {
  json j;
  j["default_answer"] = global_default_;
  j["questions"] = json::array();
  for (const auto& [question, entry] : by_question_) {
    json q;
    q["question"] = question;
    if (!entry.closed_book_answer.empty()) q["closed_book"] = entry.closed_book_answer;
    if (!entry.default_answer.empty()) q["default"] = entry.default_answer;
    q["rules"] = json::array();
    for (const auto& r : entry.rules) q["rules"].push_back(rule_to_json(r));
    j["questions"].push_back(std::move(q));
  }
  return j.dump(2);
}

// --- HTTP oracle -----------------------------------------------------------

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string base_url, int timeout_ms)
      : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(0, timeout_ms_ * 1000LL);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) return {0, ""};
    return {res->status, res->body};
  }

 private:
  std::string base_url_;
  int timeout_ms_;
};

struct SlotGuard {
  std::mutex& mu;
  std::condition_variable& cv;
  int& count;
  ~SlotGuard() {
    {
      std::lock_guard<std::mutex> lock(mu);
      --count;
    }
    cv.notify_one();
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      int timeout_ms) {
  return std::make_unique<HttplibTransport>(base_url, timeout_ms);
}

HttpOracle::HttpOracle(std::unique_ptr<HttpTransport> transport, HttpOracleConfig cfg)
    : transport_(std::move(transport)), cfg_(std::move(cfg)) {
  now_ms = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
  sleep_ms = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
}

AnswerAttempt HttpOracle::generate(const OracleRequest& request) {
  {
    std::unique_lock<std::mutex> lock(slots_mu_);
    slots_cv_.wait(lock, [&] { return in_flight_ < cfg_.in_flight_limit; });
    ++in_flight_;
  }
  SlotGuard guard{slots_mu_, slots_cv_, in_flight_};

  std::string prompt = render_prompt(request.template_id, request.question, request.context);

  json body;
  body["model"] = cfg_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = 0;

  std::vector<std::pair<std::string, std::string>> headers;
  if (!cfg_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + cfg_.api_key);

  int last_status = 0;
  for (int attempt = 1; attempt <= cfg_.retries; ++attempt) {
    std::int64_t t0 = now_ms();
    HttpResponse res = transport_->post("/v1/chat/completions", body.dump(), headers);
    last_status = res.status;
    if (res.status == 200) {
      json parsed;
      try {
        parsed = json::parse(res.body);
        AnswerAttempt out;
        out.raw_text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        out.latency = std::chrono::milliseconds(now_ms() - t0);
        out.source = AnswerAttempt::Source::Http;
        return out;
      } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed chat completion response: ") + e.what());
      }
    }
    if (attempt < cfg_.retries) sleep_ms(cfg_.backoff_ms << (attempt - 1));
  }
  throw std::runtime_error("oracle transport failed after " + std::to_string(cfg_.retries) +
                           " attempts (last status " + std::to_string(last_status) + ")");
}

// --- caching ---------------------------------------------------------------

std::string CachingOracle::request_key(const OracleRequest& request) {
  json j;
  j["template"] = request.template_id;
  j["question"] = request.question;
  j["context"] = request.context.has_value() ? json(*request.context) : json(nullptr);
  std::uint64_t h = fnv1a64(j.dump());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

CachingOracle::CachingOracle(Oracle& inner, std::string path)
    : inner_(inner), path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      answers_[j.at("hash").get<std::string>()] =
          j.at("response").at("raw_text").get<std::string>();
    } catch (const json::exception&) {
      // Damaged tail of an interrupted run; later appends re-add the entry.
    }
  }
}

AnswerAttempt CachingOracle::generate(const OracleRequest& request) {
  std::string key = request_key(request);
  {
    std::shared_lock lock(mu_);
    auto it = answers_.find(key);
    if (it != answers_.end()) {
      AnswerAttempt attempt;
      attempt.raw_text = it->second;
      attempt.source = AnswerAttempt::Source::Cache;
      ++hits_;
      return attempt;
    }
  }

  AnswerAttempt fresh = inner_.generate(request);

  std::unique_lock lock(mu_);
  ++forwarded_;
  auto [it, inserted] = answers_.emplace(key, fresh.raw_text);
  if (inserted) {
    json line;
    line["hash"] = key;
    line["request"] = {
        {"template", request.template_id},
        {"question", request.question},
        {"context", request.context.has_value() ? json(*request.context) : json(nullptr)}};
    line["response"] = {{"raw_text", fresh.raw_text},
                        {"source", fresh.source == AnswerAttempt::Source::Http ? "http" : "scripted"}};
    line["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
    std::ofstream out(path_, std::ios::app);
    out << line.dump() << "\n";
  }
  return fresh;
}

// --- correctness -----------------------------------------------------------

bool is_correct(const AnswerAttempt& attempt, std::span<const std::string> gold_answers,
                MatchMode mode) {
  if (mode == MatchMode::Exact) {
    std::string pred = normalize_answer(attempt.raw_text);
    for (const auto& gold : gold_answers) {
      if (pred == normalize_answer(gold)) return true;
    }
    return false;
  }
  std::vector<std::string> pred_tokens = normalized_tokens(attempt.raw_text);
  for (const auto& gold : gold_answers) {
    if (contains_phrase(pred_tokens, normalized_tokens(gold))) return true;
  }
  return false;
}

}  // namespace ecorag
