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

// Self-Fusion prompts for a general-purpose text generation model: tagging
// a translation given its tagged English counterpart, and choosing between
// two candidate annotations.

#ifndef TRANSFUSION_PROMPTS_HPP_
#define TRANSFUSION_PROMPTS_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"
#include "transfusion/ner_core.hpp"

namespace transfusion {

using TaggedToken = std::pair<std::string, std::string>;    // (word, BIO tag)
using LabeledSurface = std::pair<std::string, std::string>;  // (label, surface text)

namespace detail {

// Python repr() of a str, which is how the expected output format is shown.
inline std::string python_repr(std::string_view s) {
  const bool has_single = s.find('\'') != std::string_view::npos;
  const bool has_double = s.find('"') != std::string_view::npos;
  const char quote = has_single && !has_double ? '"' : '\'';
  std::string out(1, quote);
  for (char c : s) {
    if (c == '\\' || c == quote) out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += quote;
  return out;
}

inline std::string label_description(const std::string& name) {
  if (name == "PER") return "person";
  if (name == "LOC") return "location";
  if (name == "ORG") return "organization";
  if (name == "DATE") return "date";
  if (name == "GPE") return "geopolitical entity";
  if (name == "MISC") return "miscellaneous";
  return {};
}

// "PER (person), LOC (location), and ORG (organization)"
inline std::string describe_labels(const LabelSet& labels) {
  const LabelSet& use = labels.empty() ? LabelSet::conll() : labels;
  std::vector<std::string> items;
  for (const auto& name : use.names()) {
    const std::string what = label_description(name);
    items.push_back(what.empty() ? name : name + " (" + what + ")");
  }
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    if (i + 1 == items.size()) out += "and ";
    out += items[i];
  }
  return out;
}

}  // namespace detail

// [('Manchester', 'B-ORG'), ('City', 'I-ORG'), ...]
inline std::string render_tagged_tuples(const std::vector<TaggedToken>& tagged) {
  std::string out = "[";
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    if (i > 0) out += ", ";
    out += "(" + detail::python_repr(tagged[i].first) + ", " +
           detail::python_repr(tagged[i].second) + ")";
  }
  return out + "]";
}

inline std::vector<TaggedToken> tagged_tokens(const Sentence& sentence) {
  const TagSequence tags = tags_of(sentence);
  std::vector<TaggedToken> out;
  for (std::size_t i = 0; i < tags.size(); ++i) out.emplace_back(sentence.tokens[i], tags[i]);
  return out;
}

// An empty label set means PER, LOC and ORG.
inline std::string build_self_fusion_prompt(const TokenSequence& tgt_tokens,
                                            const std::vector<TaggedToken>& english_tagged,
                                            std::string_view language_name,
                                            const LabelSet& labels = {}) {
  if (english_tagged.empty()) throw InputError("self-fusion prompt needs a tagged English sentence");
  const std::string lang(language_name);
  std::string p;
  p += "Task Description: You are working as a named entity recognition expert and your "
       "task is to label a given text with named entity labels. Your task is to identify "
       "and label any named entities present in the text. Specifically, you will be given "
       "an English sentence that has already been tagged, and you will predict on a "
       "translation of that sentence in " + lang + ".\n\n";
  p += "The named entity labels that you will be using are " + detail::describe_labels(labels) +
       ". You may encounter multi-word entities, so make sure to label each word of the "
       "entity with the appropriate prefix (\"B\" for the first word of the entity, \"I\" "
       "for any non-initial word of the entity). For words which are not part of any named "
       "entity, you should return \"O\".\n";
  p += "Note: Your output format should be a list of tuples, where each tuple consists of a "
       "word from the input text and its corresponding named entity label.\n\n";
  p += "English Output:\n" + render_tagged_tuples(english_tagged) + "\n\n";
  p += lang + " Sentence:\n[" + join_tokens(tgt_tokens, ", ") + "]\n";
  return p;
}

// Spans as "LABEL: surface" pairs, surface being the space-joined tokens.
inline std::vector<LabeledSurface> labeled_surfaces(const Sentence& sentence) {
  std::vector<LabeledSurface> out;
  for (const auto& span : sentence.spans) {
    TokenSequence words(sentence.tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                        sentence.tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
    out.emplace_back(span.label, join_tokens(words));
  }
  return out;
}

inline std::string build_selection_prompt(std::string_view tgt_text,
                                          std::string_view english_translation,
                                          const std::vector<LabeledSurface>& option1,
                                          const std::vector<LabeledSurface>& option2,
                                          std::string_view language_name) {
  const std::string lang(language_name);
  std::string p;
  p += "Your task is to choose the correct NER annotations from Option 1 and 2.\n";
  p += "CoNLL NER annotation scheme: (PER: Person; LOC: Location; ORG: Organization)\n";
  p += "Based on the sentence in " + lang +
       " and its English translation, which one is correct?\n";
  p += "Note: Your output is only \"Option 1\" or \"Option 2\".\n\n";
  p += lang + ": " + std::string(tgt_text) + "\n";
  p += "English Translation: " + std::string(english_translation) + "\n\n";
  auto block = [&p](int n, const std::vector<LabeledSurface>& option) {
    p += "===NER tags (Option " + std::to_string(n) + ")===\n";
    for (const auto& [label, surface] : option) p += label + ": " + surface + "\n";
  };
  block(1, option1);
  block(2, option2);
  p += "===Answer===\n";
  return p;
}

}  // namespace transfusion

#endif  // TRANSFUSION_PROMPTS_HPP_
