// Copyright 2026 The NumNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numnet/textnum.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace numnet {

namespace {

using ordered_json = nlohmann::ordered_json;

enum class CharClass { kSpace, kDigit, kPunct, kWord };

// Decodes one UTF-8 code point starting at `pos`. Invalid bytes decode as
// themselves with length 1 so tokenization never stalls.
char32_t Decode(std::string_view text, size_t pos, size_t *length) {
  unsigned char c = text[pos];
  int extra = 0;
  char32_t cp = c;
  if (c >= 0xF0 && c < 0xF8) {
    extra = 3;
    cp = c & 0x07;
  } else if (c >= 0xE0) {
    extra = 2;
    cp = c & 0x0F;
  } else if (c >= 0xC0) {
    extra = 1;
    cp = c & 0x1F;
  }
  if (extra > 0 && pos + extra >= text.size()) {
    *length = 1;
    return c;
  }
  for (int i = 1; i <= extra; ++i) {
    unsigned char cc = text[pos + i];
    if ((cc & 0xC0) != 0x80) {
      *length = 1;
      return c;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  *length = extra + 1;
  return cp;
}

CharClass Classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
        cp == '\v') {
      return CharClass::kSpace;
    }
    if (cp >= '0' && cp <= '9') return CharClass::kDigit;
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || cp == '_') {
      return CharClass::kWord;
    }
    if (cp < 0x20 || cp == 0x7F) return CharClass::kSpace;
    return CharClass::kPunct;
  }
  switch (cp) {
    case 0x00A0:  // no-break space
    case 0x2009:
    case 0x200B:
      return CharClass::kSpace;
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0x2026:
    case 0x00AB:
    case 0x00BB:
    case 0x2212:  // minus sign
      return CharClass::kPunct;
    default:
      return CharClass::kWord;
  }
}

bool IsDigit(std::string_view text, size_t pos) {
  return pos < text.size() && text[pos] >= '0' && text[pos] <= '9';
}

CharClass ClassAt(std::string_view text, size_t pos) {
  size_t len;
  return Classify(Decode(text, pos, &len));
}

// Scans a number run starting at `pos` (which must be a digit) and returns
// the end offset.
size_t ScanNumber(std::string_view text, size_t pos) {
  size_t j = pos;
  while (IsDigit(text, j)) ++j;
  size_t lead = j - pos;
  if (lead <= 3) {
    while (j < text.size() && text[j] == ',' && IsDigit(text, j + 1) &&
           IsDigit(text, j + 2) && IsDigit(text, j + 3) &&
           !IsDigit(text, j + 4)) {
      j += 4;
    }
  }
  if (j < text.size() && text[j] == '.' && IsDigit(text, j + 1)) {
    ++j;
    while (IsDigit(text, j)) ++j;
  }
  return j;
}

// Scans letters and digits; stops at space or punctuation.
size_t ScanWord(std::string_view text, size_t pos) {
  size_t j = pos;
  while (j < text.size()) {
    size_t len;
    CharClass cls = Classify(Decode(text, j, &len));
    if (cls != CharClass::kWord && cls != CharClass::kDigit) break;
    j += len;
  }
  return j;
}

bool IsPunctuationToken(std::string_view text) {
  if (text.empty()) return false;
  size_t len;
  char32_t cp = Decode(text, 0, &len);
  return len == text.size() && Classify(cp) == CharClass::kPunct;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = x - 'A' + 'a';
    if (y >= 'A' && y <= 'Z') y = y - 'A' + 'a';
    if (x != y) return false;
  }
  return true;
}

std::string RenderDate(const GoldAnswer &gold) {
  std::string out;
  for (const std::string *part : {&gold.date_day, &gold.date_month,
                                  &gold.date_year}) {
    if (part->empty()) continue;
    if (!out.empty()) out += ' ';
    out += *part;
  }
  return out;
}

std::string RequireString(const ordered_json &obj, const char *key,
                          const std::string &passage_id) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError("missing key '" + std::string(key) + "' in passage '" +
                      passage_id + "'");
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw SchemaError("key '" + std::string(key) + "' in passage '" +
                    passage_id + "' is not a string");
}

GoldAnswer ParseAnswer(const ordered_json &answer,
                       const std::string &passage_id) {
  if (!answer.is_object()) {
    throw SchemaError("answer in passage '" + passage_id +
                      "' is not an object");
  }
  GoldAnswer gold;
  if (auto it = answer.find("number"); it != answer.end()) {
    if (it->is_string()) {
      gold.number = it->get<std::string>();
    } else if (it->is_number()) {
      gold.number = it->dump();
    }
  }
  if (auto it = answer.find("spans"); it != answer.end() && it->is_array()) {
    for (const auto &span : *it) {
      if (span.is_string()) gold.spans.push_back(span.get<std::string>());
    }
  }
  if (gold.number.empty() && gold.spans.empty()) {
    if (auto it = answer.find("date"); it != answer.end() && it->is_object()) {
      gold.date_day = it->value("day", "");
      gold.date_month = it->value("month", "");
      gold.date_year = it->value("year", "");
      std::string rendered = RenderDate(gold);
      if (!rendered.empty()) {
        gold.is_date = true;
        gold.spans.push_back(std::move(rendered));
      }
    }
  }
  return gold;
}

ordered_json AnswerToJson(const GoldAnswer &gold) {
  ordered_json out;
  out["number"] = gold.number;
  ordered_json spans = ordered_json::array();
  if (!gold.is_date) {
    for (const auto &span : gold.spans) spans.push_back(span);
  }
  out["spans"] = spans;
  out["date"] = {{"day", gold.date_day},
                 {"month", gold.date_month},
                 {"year", gold.date_year}};
  return out;
}

}  // namespace

const char *SourceName(Source source) {
  return source == Source::kQuestion ? "Q" : "P";
}

std::string GoldAnswer::AsText() const {
  if (!number.empty()) return number;
  std::string out;
  for (const auto &span : spans) {
    if (!out.empty()) out += ' ';
    out += span;
  }
  return out;
}

bool DropExample::HasUnsupportedGold() const {
  for (const auto &gold : gold_answers) {
    if (gold.is_date) return true;
  }
  return false;
}

const DropExample *Corpus::Find(std::string_view query_id) const {
  for (const auto &example : examples) {
    if (example.query_id == query_id) return &example;
  }
  return nullptr;
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  auto emit = [&](size_t begin, size_t end) {
    tokens.push_back(Token{std::string(text.substr(begin, end - begin)),
                           begin, end});
  };
  while (i < text.size()) {
    size_t len;
    char32_t cp = Decode(text, i, &len);
    CharClass cls = Classify(cp);
    if (cls == CharClass::kSpace) {
      i += len;
      continue;
    }
    bool at_chunk_start =
        i == 0 || ClassAt(text, i - 1) == CharClass::kSpace;
    bool signed_number = (cp == '-' || cp == '+') && at_chunk_start &&
                         IsDigit(text, i + 1);
    if (cls == CharClass::kDigit || signed_number) {
      size_t j = ScanNumber(text, signed_number ? i + 1 : i);
      // Ordinals and similar ("1st", "10am") stay whole and are not numbers.
      if (j < text.size() && ClassAt(text, j) == CharClass::kWord) {
        j = ScanWord(text, j);
      }
      emit(i, j);
      i = j;
    } else if (cls == CharClass::kPunct) {
      emit(i, i + len);
      i += len;
    } else {
      size_t j = ScanWord(text, i);
      emit(i, j);
      i = j;
    }
  }
  return tokens;
}

std::optional<double> ParseNumberToken(std::string_view text) {
  size_t i = 0;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
  size_t digits_begin = i;
  while (IsDigit(text, i)) ++i;
  size_t lead = i - digits_begin;
  if (lead == 0) return std::nullopt;
  while (i < text.size() && text[i] == ',') {
    if (lead > 3 || !IsDigit(text, i + 1) || !IsDigit(text, i + 2) ||
        !IsDigit(text, i + 3) || IsDigit(text, i + 4)) {
      return std::nullopt;
    }
    i += 4;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    size_t frac_begin = i;
    while (IsDigit(text, i)) ++i;
    if (i == frac_begin) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;

  std::string plain;
  plain.reserve(text.size());
  for (char c : text) {
    if (c != ',' && c != '+') plain += c;
  }
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(plain.data(), plain.data() + plain.size(), value);
  if (ec != std::errc() || ptr != plain.data() + plain.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<NumberOccurrence> ExtractNumbers(const std::vector<Token> &tokens,
                                             Source source) {
  std::vector<NumberOccurrence> numbers;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (auto value = ParseNumberToken(tokens[i].text)) {
      numbers.push_back(NumberOccurrence{*value, i, source});
    }
  }
  return numbers;
}

DropExample MakeExample(std::string passage_id, std::string query_id,
                        std::string passage_text, std::string question_text,
                        std::vector<GoldAnswer> gold_answers) {
  DropExample example;
  example.passage_id = std::move(passage_id);
  example.query_id = std::move(query_id);
  example.passage_text = std::move(passage_text);
  example.question_text = std::move(question_text);
  example.passage_tokens = Tokenize(example.passage_text);
  example.question_tokens = Tokenize(example.question_text);
  example.passage_numbers =
      ExtractNumbers(example.passage_tokens, Source::kPassage);
  example.question_numbers =
      ExtractNumbers(example.question_tokens, Source::kQuestion);
  example.gold_answers = std::move(gold_answers);
  return example;
}

Corpus LoadDropJson(std::istream &in, Split split) {
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  ordered_json root;
  try {
    root = ordered_json::parse(bytes);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) +
                         ": " + e.what(),
                     e.byte);
  }
  if (!root.is_object()) {
    throw SchemaError("top level must be an object of passages");
  }

  Corpus corpus;
  corpus.split = split;
  std::unordered_map<std::string, int> seen;
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string &passage_id = it.key();
    const ordered_json &entry = it.value();
    if (!entry.is_object()) {
      throw SchemaError("passage '" + passage_id + "' is not an object");
    }
    std::string passage = RequireString(entry, "passage", passage_id);
    auto qa_it = entry.find("qa_pairs");
    if (qa_it == entry.end() || !qa_it->is_array()) {
      throw SchemaError("missing key 'qa_pairs' in passage '" + passage_id +
                        "'");
    }
    for (const auto &qa : *qa_it) {
      if (!qa.is_object()) {
        throw SchemaError("qa pair in passage '" + passage_id +
                          "' is not an object");
      }
      std::string question = RequireString(qa, "question", passage_id);
      std::string query_id = RequireString(qa, "query_id", passage_id);
      auto answer_it = qa.find("answer");
      if (answer_it == qa.end()) {
        throw SchemaError("missing key 'answer' in passage '" + passage_id +
                          "'");
      }
      std::vector<GoldAnswer> golds;
      golds.push_back(ParseAnswer(*answer_it, passage_id));
      if (auto v = qa.find("validated_answers");
          v != qa.end() && v->is_array()) {
        for (const auto &answer : *v) {
          golds.push_back(ParseAnswer(answer, passage_id));
        }
      }
      if (seen[query_id]++ > 0) {
        throw SchemaError("duplicate query_id '" + query_id +
                          "' in passage '" + passage_id + "'");
      }
      corpus.examples.push_back(MakeExample(passage_id, query_id, passage,
                                            question, std::move(golds)));
    }
  }
  return corpus;
}

Corpus LoadDropJsonFile(const std::string &path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return LoadDropJson(in, split);
}

std::string DumpDropJson(const Corpus &corpus) {
  ordered_json root = ordered_json::object();
  for (const auto &example : corpus.examples) {
    ordered_json &entry = root[example.passage_id];
    if (!entry.contains("passage")) {
      entry["passage"] = example.passage_text;
      entry["qa_pairs"] = ordered_json::array();
    }
    ordered_json qa;
    qa["question"] = example.question_text;
    qa["query_id"] = example.query_id;
    if (example.gold_answers.empty()) {
      qa["answer"] = AnswerToJson(GoldAnswer{});
    } else {
      qa["answer"] = AnswerToJson(example.gold_answers.front());
    }
    if (example.gold_answers.size() > 1) {
      ordered_json validated = ordered_json::array();
      for (size_t i = 1; i < example.gold_answers.size(); ++i) {
        validated.push_back(AnswerToJson(example.gold_answers[i]));
      }
      qa["validated_answers"] = validated;
    }
    entry["qa_pairs"].push_back(std::move(qa));
  }
  return root.dump(1) + "\n";
}

void SaveDropJsonFile(const Corpus &corpus, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << DumpDropJson(corpus);
}

DropExample Trim(const DropExample &example, size_t passage_limit,
                 size_t question_limit) {
  DropExample out = example;
  if (out.passage_tokens.size() > passage_limit) {
    out.passage_tokens.resize(passage_limit);
  }
  if (out.question_tokens.size() > question_limit) {
    out.question_tokens.resize(question_limit);
  }
  std::erase_if(out.passage_numbers, [&](const NumberOccurrence &n) {
    return n.token_index >= passage_limit;
  });
  std::erase_if(out.question_numbers, [&](const NumberOccurrence &n) {
    return n.token_index >= question_limit;
  });
  return out;
}

std::optional<ComparingPattern> MatchComparingPattern(
    const std::vector<Token> &tokens) {
  constexpr size_t kMaxCandidateTokens = 5;
  size_t n = tokens.size();
  if (n < 5 || tokens[n - 1].text != "?") return std::nullopt;

  size_t or_index = n;
  for (size_t i = n - 1; i-- > 0;) {
    if (EqualsIgnoreCase(tokens[i].text, "or")) {
      or_index = i;
      break;
    }
  }
  if (or_index == n || or_index == 0) return std::nullopt;

  ComparingPattern match;
  match.b_begin = or_index + 1;
  match.b_end = n - 1;
  size_t b_len = match.b_end - match.b_begin;
  if (b_len < 1 || b_len > kMaxCandidateTokens) return std::nullopt;
  for (size_t i = match.b_begin; i < match.b_end; ++i) {
    if (IsPunctuationToken(tokens[i].text)) return std::nullopt;
  }

  match.a_end = or_index;
  size_t i = or_index;
  while (i > 0) {
    const std::string &text = tokens[i - 1].text;
    if (IsPunctuationToken(text) || EqualsIgnoreCase(text, "or")) break;
    --i;
  }
  match.a_begin = i;
  size_t a_len = match.a_end - match.a_begin;
  if (a_len < 1 || a_len > kMaxCandidateTokens || i == 0) return std::nullopt;
  const std::string &delimiter = tokens[i - 1].text;
  if (delimiter != ":" && delimiter != "," && delimiter != ";") {
    return std::nullopt;
  }
  return match;
}

Corpus AugmentComparisons(const Corpus &corpus, uint64_t /*seed*/) {
  static constexpr std::string_view kSuffix = "#swap";
  Corpus out;
  out.split = corpus.split;
  out.examples.reserve(corpus.examples.size() * 2);
  std::unordered_set<std::string> present;
  for (const auto &example : corpus.examples) present.insert(example.query_id);
  for (const auto &example : corpus.examples) {
    out.examples.push_back(example);
    if (example.query_id.ends_with(kSuffix)) continue;
    if (present.count(example.query_id + std::string(kSuffix))) continue;
    auto match = MatchComparingPattern(example.question_tokens);
    if (!match) continue;

    const auto &tokens = example.question_tokens;
    const std::string &q = example.question_text;
    size_t a_start = tokens[match->a_begin].char_start;
    size_t a_stop = tokens[match->a_end - 1].char_end;
    size_t b_start = tokens[match->b_begin].char_start;
    size_t b_stop = tokens[match->b_end - 1].char_end;
    std::string swapped = q.substr(0, a_start) +
                          q.substr(b_start, b_stop - b_start) +
                          q.substr(a_stop, b_start - a_stop) +
                          q.substr(a_start, a_stop - a_start) +
                          q.substr(b_stop);

    DropExample augmented = example;
    augmented.query_id = example.query_id + std::string(kSuffix);
    augmented.question_text = std::move(swapped);
    augmented.question_tokens = Tokenize(augmented.question_text);
    augmented.question_numbers =
        ExtractNumbers(augmented.question_tokens, Source::kQuestion);
    out.examples.push_back(std::move(augmented));
  }
  return out;
}

}  // namespace numnet
