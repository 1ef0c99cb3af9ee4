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

// Inline entity markers: "x1 x2 <PER> x3 x4 </PER> x5".
//
// Markers are standalone whitespace-delimited tokens. This is the form in
// which labels cross a machine translation system and the form the fusion
// model reads its high-resource segment in.

#ifndef TRANSFUSION_MARKER_CODEC_HPP_
#define TRANSFUSION_MARKER_CODEC_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"
#include "transfusion/ner_core.hpp"

namespace transfusion {

enum class MarkerStyle {
  kXml,     // <PER> ... </PER>
  kSquare,  // [PER] ... [/PER]
};

enum class ParseMode { kStrict, kLenient };

struct MarkedText {
  std::string text;
  LabelSet label_set;
  MarkerStyle style = MarkerStyle::kXml;
};

inline std::string open_marker(std::string_view label, MarkerStyle style = MarkerStyle::kXml) {
  return style == MarkerStyle::kXml ? "<" + std::string(label) + ">"
                                    : "[" + std::string(label) + "]";
}

inline std::string close_marker(std::string_view label, MarkerStyle style = MarkerStyle::kXml) {
  return style == MarkerStyle::kXml ? "</" + std::string(label) + ">"
                                    : "[/" + std::string(label) + "]";
}

struct MarkerToken {
  bool closing = false;
  std::string_view label;
};

// Syntactic match only; the label is not checked against any label set.
inline std::optional<MarkerToken> match_marker(std::string_view token,
                                               MarkerStyle style = MarkerStyle::kXml) {
  const char lhs = style == MarkerStyle::kXml ? '<' : '[';
  const char rhs = style == MarkerStyle::kXml ? '>' : ']';
  if (token.size() < 3 || token.front() != lhs || token.back() != rhs) return std::nullopt;
  std::string_view body = token.substr(1, token.size() - 2);
  bool closing = false;
  if (body.front() == '/') {
    closing = true;
    body.remove_prefix(1);
  }
  if (!is_valid_label(body)) return std::nullopt;
  return MarkerToken{closing, body};
}

// Wraps each span (L, s, e) as <L> before token s and </L> after token e-1.
inline MarkedText insert_markers(const Sentence& sentence, const LabelSet& labels,
                                 MarkerStyle style = MarkerStyle::kXml) {
  validate_sentence(sentence, &labels);
  std::string text;
  auto append = [&text](std::string_view piece) {
    if (!text.empty()) text += ' ';
    text += piece;
  };
  std::size_t next = 0;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (next < sentence.spans.size() && sentence.spans[next].start == i) {
      append(open_marker(sentence.spans[next].label, style));
    }
    append(sentence.tokens[i]);
    if (next < sentence.spans.size() && sentence.spans[next].end == i + 1) {
      append(close_marker(sentence.spans[next].label, style));
      ++next;
    }
  }
  return {std::move(text), labels, style};
}

// Label set taken from the sentence's own spans.
inline MarkedText insert_markers(const Sentence& sentence,
                                 MarkerStyle style = MarkerStyle::kXml) {
  return insert_markers(sentence, labels_of(sentence.spans), style);
}

// Recovers clean tokens and spans. Strict mode throws InputError on an
// unbalanced, nested, crossing, empty or unknown-label marker. Lenient mode
// never throws: it drops every marker involved in such a defect and keeps the
// surrounding text. Marker-shaped tokens whose label is not in `labels` are
// ordinary tokens in lenient mode.
inline Sentence parse_markers(std::string_view marked, const LabelSet& labels,
                              ParseMode mode, MarkerStyle style = MarkerStyle::kXml) {
  const bool strict = mode == ParseMode::kStrict;
  Sentence out;
  struct Open {
    std::string label;
    std::size_t start;
  };
  std::optional<Open> open;

  auto reject = [&](const std::string& why) {
    if (strict) throw InputError("malformed markers: " + why);
  };

  for (auto& token : split_whitespace(marked)) {
    const auto marker = match_marker(token, style);
    if (!marker) {
      out.tokens.push_back(std::move(token));
      continue;
    }
    if (!labels.contains(marker->label)) {
      reject("unknown label in marker '" + token + "'");
      out.tokens.push_back(std::move(token));
      continue;
    }
    if (!marker->closing) {
      if (open) reject("marker '" + token + "' opened inside <" + open->label + ">");
      open = Open{std::string(marker->label), out.tokens.size()};
      continue;
    }
    if (!open) {
      reject("closing marker '" + token + "' without an opening marker");
      continue;
    }
    if (open->label != marker->label) {
      reject("closing marker '" + token + "' does not match <" + open->label + ">");
      open.reset();
      continue;
    }
    if (open->start == out.tokens.size()) {
      reject("empty entity '" + token + "'");
      open.reset();
      continue;
    }
    out.spans.push_back({std::move(open->label), open->start, out.tokens.size()});
    open.reset();
  }
  if (open) reject("marker <" + open->label + "> is never closed");
  return out;
}

inline Sentence parse_markers(const MarkedText& marked, ParseMode mode) {
  return parse_markers(marked.text, marked.label_set, mode, marked.style);
}

// Sorted labels of the well-formed marker pairs recovered in lenient mode.
inline std::vector<std::string> marker_label_multiset(const MarkedText& marked) {
  const Sentence parsed = parse_markers(marked, ParseMode::kLenient);
  std::vector<std::string> labels;
  labels.reserve(parsed.spans.size());
  for (const auto& span : parsed.spans) labels.push_back(span.label);
  std::sort(labels.begin(), labels.end());
  return labels;
}

// True iff both texts carry the same multiset of entity labels. Order is not
// compared: translation may legitimately reorder entities.
inline bool markers_consistent(const MarkedText& before, const MarkedText& after) {
  return marker_label_multiset(before) == marker_label_multiset(after);
}

}  // namespace transfusion

#endif  // TRANSFUSION_MARKER_CODEC_HPP_
