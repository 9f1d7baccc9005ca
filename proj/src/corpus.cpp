#include "ecorag/corpus.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ecorag {

namespace {

constexpr std::array<std::string_view, 10> kAbbreviations = {
    "Dr.", "Mr.", "Mrs.", "Ms.", "St.", "vs.", "etc.", "e.g.", "i.e.", "U.S."};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Token ending at the '.' at position i (inclusive), scanning back over
// alphanumerics and dots so multi-dot forms like "e.g." are captured whole.
bool ends_abbreviation(std::string_view body, std::size_t i) {
  std::size_t start = i;
  while (start > 0) {
    unsigned char c = static_cast<unsigned char>(body[start - 1]);
    if (std::isalnum(c) || c == '.') {
      --start;
    } else {
      break;
    }
  }
  std::string_view token = body.substr(start, i - start + 1);
  for (auto abbrev : kAbbreviations) {
    if (token == abbrev) return true;
  }
  return false;
}

bool boundary_at(std::string_view body, std::size_t i) {
  if (!is_terminator(body[i])) return false;
  std::size_t j = i + 1;
  if (j == body.size()) return true;
  if (!std::isspace(static_cast<unsigned char>(body[j]))) return false;
  while (j < body.size() && std::isspace(static_cast<unsigned char>(body[j]))) ++j;
  if (j < body.size() && !std::isupper(static_cast<unsigned char>(body[j]))) return false;
  if (body[i] == '.' && ends_abbreviation(body, i)) return false;
  return true;
}

}  // namespace

std::vector<SentenceUnit> split_sentences(std::string_view body,
                                          std::string_view doc_id,
                                          const TokenizerConfig& cfg) {
  std::vector<SentenceUnit> out;
  std::size_t n = body.size();
  std::size_t pos = 0;

  auto skip_ws = [&](std::size_t p) {
    while (p < n && std::isspace(static_cast<unsigned char>(body[p]))) ++p;
    return p;
  };

  pos = skip_ws(0);
  std::size_t sent_start = pos;
  auto emit = [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return;
    SentenceUnit unit;
    unit.doc_id = std::string(doc_id);
    unit.id = std::string(doc_id) + "#" + std::to_string(out.size());
    unit.begin = begin;
    unit.end = end;
    unit.text = std::string(body.substr(begin, end - begin));
    unit.token_count = count_tokens(unit.text, cfg);
    out.push_back(std::move(unit));
  };

  for (std::size_t i = sent_start; i < n; ++i) {
    if (boundary_at(body, i)) {
      emit(sent_start, i + 1);
      sent_start = skip_ws(i + 1);
      i = sent_start - 1;  // sent_start > i here, loop ++ lands on it
    }
  }
  if (sent_start < n) {
    std::size_t last = n;
    while (last > sent_start &&
           std::isspace(static_cast<unsigned char>(body[last - 1]))) {
      --last;
    }
    emit(sent_start, last);
  }
  return out;
}

std::vector<SentenceUnit> question_sentences(const QuestionRecord& record,
                                             const TokenizerConfig& cfg) {
  std::vector<SentenceUnit> out;
  for (const auto& doc : record.documents) {
    auto units = split_sentences(doc.body, doc.id, cfg);
    out.insert(out.end(), units.begin(), units.end());
  }
  return out;
}

namespace {

using nlohmann::json;

QuestionRecord parse_record(const json& obj, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) -> std::runtime_error {
    return std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  };
  if (!obj.is_object()) throw fail("not a JSON object");
  for (const char* key : {"id", "question", "answers", "documents"}) {
    if (!obj.contains(key)) throw fail(std::string("missing key \"") + key + "\"");
  }

  QuestionRecord rec;
  if (!obj["id"].is_string()) throw fail("key \"id\" must be a string");
  rec.id = obj["id"].get<std::string>();
  if (!obj["question"].is_string()) throw fail("key \"question\" must be a string");
  rec.question = obj["question"].get<std::string>();

  if (!obj["answers"].is_array() || obj["answers"].empty())
    throw fail("key \"answers\" must be a non-empty array");
  for (const auto& a : obj["answers"]) {
    if (!a.is_string()) throw fail("key \"answers\" must contain strings");
    std::string alias = a.get<std::string>();
    if (normalize_answer(alias).empty())
      throw fail("key \"answers\" has an alias that is empty after normalization");
    rec.gold_answers.push_back(std::move(alias));
  }

  if (!obj["documents"].is_array())
    throw fail("key \"documents\" must be an array");
  for (const auto& d : obj["documents"]) {
    if (!d.is_object() || !d.contains("id") || !d.contains("body"))
      throw fail("key \"documents\" entries need \"id\" and \"body\"");
    DocumentRecord doc;
    if (!d["id"].is_string()) throw fail("document \"id\" must be a string");
    doc.id = d["id"].get<std::string>();
    if (d.contains("title") && !d["title"].is_null()) {
      if (!d["title"].is_string()) throw fail("document \"title\" must be a string or null");
      doc.title = d["title"].get<std::string>();
    }
    if (!d["body"].is_string() || d["body"].get<std::string>().empty())
      throw fail("document \"body\" must be a non-empty string");
    doc.body = d["body"].get<std::string>();
    rec.documents.push_back(std::move(doc));
  }
  return rec;
}

}  // namespace

std::vector<QuestionRecord> load_dataset(const std::string& path, bool strict,
                                         LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::vector<QuestionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line, nullptr, true);
      records.push_back(parse_record(obj, line_no));
    } catch (const json::parse_error& e) {
      std::string msg = "line " + std::to_string(line_no) + ": invalid JSON (" +
                        std::string(e.what()) + ")";
      if (strict) throw std::runtime_error(msg);
      if (report) {
        report->warnings.push_back(msg);
        ++report->skipped;
      }
    } catch (const std::runtime_error& e) {
      if (strict) throw;
      if (report) {
        report->warnings.push_back(e.what());
        ++report->skipped;
      }
    }
  }
  return records;
}

}  // namespace ecorag
