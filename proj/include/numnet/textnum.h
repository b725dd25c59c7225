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

#ifndef NUMNET_TEXTNUM_H_
#define NUMNET_TEXTNUM_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace numnet {

// Token with its byte span in the source text.
struct Token {
  std::string text;
  size_t char_start = 0;
  size_t char_end = 0;

  bool operator==(const Token &) const = default;
};

enum class Source { kQuestion, kPassage };

const char *SourceName(Source source);

// One numeric token occurrence.
struct NumberOccurrence {
  double value = 0.0;
  size_t token_index = 0;
  Source source = Source::kPassage;

  bool operator==(const NumberOccurrence &) const = default;
};

// A gold answer as stored in a DROP record. Date answers are rendered into
// `spans` and flagged with `is_date`; they are never produced by the model.
struct GoldAnswer {
  std::string number;
  std::vector<std::string> spans;
  bool is_date = false;
  std::string date_day, date_month, date_year;

  // Canonical string used for scoring: the number if present, else the
  // spans joined by a single space.
  std::string AsText() const;

  bool operator==(const GoldAnswer &) const = default;
};

struct DropExample {
  std::string passage_id;
  std::string query_id;
  std::string passage_text;
  std::string question_text;
  std::vector<Token> passage_tokens;
  std::vector<Token> question_tokens;
  std::vector<NumberOccurrence> passage_numbers;
  std::vector<NumberOccurrence> question_numbers;
  std::vector<GoldAnswer> gold_answers;

  // True if any gold answer is a date.
  bool HasUnsupportedGold() const;
};

enum class Split { kTrain, kDev, kTest };

struct Corpus {
  std::vector<DropExample> examples;
  Split split = Split::kTrain;

  const DropExample *Find(std::string_view query_id) const;
};

// Malformed JSON input. `byte_offset` points at the offending byte.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &what, size_t byte_offset)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

// Well-formed JSON that does not follow the DROP layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits on whitespace and isolates punctuation. Digit runs keep internal
// thousands separators ("7,791") and a decimal part ("6.3"); a hyphen after
// a digit run is split off ("47-yard" -> "47" "-" "yard"); a leading sign
// directly before a digit stays attached ("-5").
std::vector<Token> Tokenize(std::string_view text);

// Parses a numeric token: optional sign, plain or comma-grouped digits,
// optional decimal part. Returns nullopt for anything else.
std::optional<double> ParseNumberToken(std::string_view text);

std::vector<NumberOccurrence> ExtractNumbers(const std::vector<Token> &tokens,
                                             Source source);

// Builds a fully processed example from raw question/passage text.
DropExample MakeExample(std::string passage_id, std::string query_id,
                        std::string passage_text, std::string question_text,
                        std::vector<GoldAnswer> gold_answers);

Corpus LoadDropJson(std::istream &in, Split split = Split::kTrain);
Corpus LoadDropJsonFile(const std::string &path, Split split = Split::kTrain);

// Serializes back to the DROP layout, grouping consecutive examples that
// share a passage_id. Output is deterministic.
std::string DumpDropJson(const Corpus &corpus);
void SaveDropJsonFile(const Corpus &corpus, const std::string &path);

DropExample Trim(const DropExample &example, size_t passage_limit,
                 size_t question_limit);

// Location of a question-final "<A> or <B>?" candidate pair, in token
// indices of the question. A = [a_begin, a_end), B = [b_begin, b_end).
struct ComparingPattern {
  size_t a_begin = 0, a_end = 0;
  size_t b_begin = 0, b_end = 0;
};

// A and B each hold 1-5 tokens, neither contains "or" or punctuation, B is
// followed only by "?", and A is preceded by a ':' ',' or ';' token.
std::optional<ComparingPattern> MatchComparingPattern(
    const std::vector<Token> &question_tokens);

// Appends, right after each comparing question, a copy whose candidates
// are swapped (query_id + "#swap"), unless that copy is already present.
// The detector is rule based, so the output does not depend on `seed`; it
// is accepted for interface stability.
Corpus AugmentComparisons(const Corpus &corpus, uint64_t seed);

}  // namespace numnet

#endif  // NUMNET_TEXTNUM_H_
