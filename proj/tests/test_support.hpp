// Copyright 2026 The TransFusion Authors. All Rights Reserved.
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

// Random generators shared by the unit and acceptance suites.

#ifndef TRANSFUSION_TESTS_TEST_SUPPORT_HPP_
#define TRANSFUSION_TESTS_TEST_SUPPORT_HPP_

#include <initializer_list>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "transfusion/conll_io.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/services.hpp"

namespace transfusion::testing {

// Latin, Ge'ez, Tamil and Bengali tokens, plus punctuation.
inline const std::vector<std::string>& token_pool() {
  static const std::vector<std::string> pool = {
      "John",  "lives",  "in",     "Paris", "Manchester", "City",  "won",   "the",
      "Addis", "Ababa",  "ሰላም",    "ኢትዮጵያ", "ትግርኛ",       "መቐለ",   "ሓዱሽ",   "வணக்கம்",
      "தமிழ்", "சென்னை", "நாடு",   "ঢাকা",  "বাংলা",      ".",     ",",     "3rd",
      "District", "Kutelu", "O'Neil", "naa", "waroon",   "poñ",   "ñi",    "x"};
  return pool;
}

inline const std::vector<std::string>& label_pool() {
  static const std::vector<std::string> labels = {"PER", "LOC", "ORG"};
  return labels;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

// 1..max_tokens tokens and 0..max_spans non-overlapping spans.
inline Sentence random_sentence(std::mt19937_64& rng, std::size_t max_tokens = 14,
                                std::size_t max_spans = 5, std::string language = "eng") {
  const auto& pool = token_pool();
  Sentence s;
  s.language = std::move(language);
  const std::size_t n = uniform(rng, 1, max_tokens);
  for (std::size_t i = 0; i < n; ++i) s.tokens.push_back(pool[rng() % pool.size()]);
  const std::size_t wanted = uniform(rng, 0, max_spans);
  std::size_t pos = uniform(rng, 0, 2);
  while (s.spans.size() < wanted && pos < n) {
    const std::size_t len = std::min(uniform(rng, 1, 3), n - pos);
    s.spans.push_back({label_pool()[rng() % label_pool().size()], pos, pos + len});
    pos += len + uniform(rng, 0, 2);
  }
  return s;
}

inline Document random_document(std::mt19937_64& rng, std::size_t sentences,
                                std::string language = "eng") {
  Document doc;
  for (std::size_t i = 0; i < sentences; ++i) doc.sentences.push_back(random_sentence(rng, 14, 5, language));
  return doc;
}

// Translator backed by a fixed text table; unknown texts are a backend error.
class TableTranslator : public Translator {
 public:
  TableTranslator(std::initializer_list<std::pair<const std::string, std::string>> table)
      : table_(table) {}

 protected:
  std::vector<std::string> do_translate(const TranslateRequest& req) const override {
    std::vector<std::string> out;
    for (const auto& text : req.texts) {
      auto it = table_.find(text);
      if (it == table_.end()) throw BackendError("no translation for '" + text + "'");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> table_;
};

}  // namespace transfusion::testing

#endif  // TRANSFUSION_TESTS_TEST_SUPPORT_HPP_
