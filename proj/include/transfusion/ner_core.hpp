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

// Sentence, span and BIO tag model shared by every other module.

#ifndef TRANSFUSION_NER_CORE_HPP_
#define TRANSFUSION_NER_CORE_HPP_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"

namespace transfusion {

using TokenSequence = std::vector<std::string>;
// One BIO tag per token: "O", "B-<label>" or "I-<label>" (IOB2).
using TagSequence = std::vector<std::string>;

inline constexpr std::string_view kOutsideTag = "O";

// Uppercase ASCII identifier: [A-Z][A-Z0-9_]*. This excludes the marker
// metacharacters < > / | and whitespace.
inline bool is_valid_label(std::string_view name) {
  if (name.empty() || name.front() < 'A' || name.front() > 'Z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

// Ordered set of entity type names.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!is_valid_label(names_[i])) {
        throw InputError("invalid entity label '" + names_[i] + "'");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (names_[j] == names_[i]) {
          throw InputError("duplicate entity label '" + names_[i] + "'");
        }
      }
    }
  }

  LabelSet(std::initializer_list<std::string> names)
      : LabelSet(std::vector<std::string>(names)) {}

  // PER, LOC, ORG.
  static LabelSet conll() { return LabelSet{"PER", "LOC", "ORG"}; }

  bool contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  // Appends `name` if absent.
  void add(const std::string& name) {
    if (contains(name)) return;
    if (!is_valid_label(name)) {
      throw InputError("invalid entity label '" + name + "'");
    }
    names_.push_back(name);
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> names_;
};

// Typed half-open token range [start, end).
struct EntitySpan {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const EntitySpan& other) const {
    return start < other.end && other.start < end;
  }

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

inline bool span_before(const EntitySpan& a, const EntitySpan& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end < b.end;
  return a.label < b.label;
}

struct Sentence {
  TokenSequence tokens;
  std::vector<EntitySpan> spans;  // sorted by start, non-overlapping
  std::string language;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

inline std::string describe(const EntitySpan& span) {
  return "(" + span.label + ", " + std::to_string(span.start) + ", " +
         std::to_string(span.end) + ")";
}

// Throws InputError unless `spans` are well-formed, sorted, non-overlapping
// and fit in `length` tokens. When `labels` is given every label must be in it.
inline void validate_spans(std::span<const EntitySpan> spans, std::size_t length,
                           const LabelSet* labels = nullptr) {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const EntitySpan& s = spans[i];
    if (!is_valid_label(s.label)) {
      throw InputError("invalid span label in " + describe(s));
    }
    if (labels != nullptr && !labels->contains(s.label)) {
      throw InputError("label outside label set in " + describe(s));
    }
    if (s.start >= s.end) throw InputError("empty span " + describe(s));
    if (s.end > length) {
      throw InputError("span " + describe(s) + " exceeds sentence length " +
                       std::to_string(length));
    }
    if (i > 0 && s.start < spans[i - 1].end) {
      throw InputError("span " + describe(s) + " overlaps or precedes " +
                       describe(spans[i - 1]));
    }
  }
}

inline void validate_sentence(const Sentence& sentence,
                              const LabelSet* labels = nullptr) {
  for (const auto& token : sentence.tokens) {
    if (token.empty()) throw InputError("empty token");
    if (token.find_first_of(" \t\r\n\v\f") != std::string::npos) {
      throw InputError("token contains whitespace: '" + token + "'");
    }
  }
  validate_spans(sentence.spans, sentence.tokens.size(), labels);
}

// Sorts spans by start and validates the result.
inline Sentence make_sentence(TokenSequence tokens, std::vector<EntitySpan> spans,
                              std::string language = {}) {
  std::sort(spans.begin(), spans.end(), span_before);
  Sentence sentence{std::move(tokens), std::move(spans), std::move(language)};
  validate_sentence(sentence);
  return sentence;
}

inline LabelSet labels_of(std::span<const EntitySpan> spans) {
  LabelSet labels;
  for (const auto& s : spans) labels.add(s.label);
  return labels;
}

// ---------------------------------------------------------------------------
// BIO codec

enum class TagMode {
  kStrict,  // an I-X must follow B-X or I-X
  kRepair,  // an orphan I-X opens a new span (IOB1 input normalizes to IOB2)
};

struct ParsedTag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string_view label;
};

inline ParsedTag parse_tag(std::string_view tag) {
  if (tag == kOutsideTag) return {};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    std::string_view label = tag.substr(2);
    if (is_valid_label(label)) return {tag[0], label};
  }
  throw InputError("malformed tag '" + std::string(tag) + "'");
}

namespace detail {

inline std::vector<EntitySpan> decode_tags(std::span<const std::string> tags,
                                           TagMode mode, const LabelSet* labels) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&](std::size_t at) {
    if (open) {
      open->end = at;
      spans.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ParsedTag tag = parse_tag(tags[i]);
    if (tag.prefix == 'O') {
      close(i);
      continue;
    }
    if (labels != nullptr && !labels->contains(tag.label)) {
      throw InputError("tag '" + tags[i] + "' at position " + std::to_string(i) +
                       " uses a label outside the label set");
    }
    if (tag.prefix == 'I' && open && open->label == tag.label) continue;
    if (tag.prefix == 'I' && mode == TagMode::kStrict) {
      throw InputError("tag '" + tags[i] + "' at position " + std::to_string(i) +
                       " does not continue an entity of the same type");
    }
    close(i);
    open = EntitySpan{std::string(tag.label), i, i};
  }
  close(tags.size());
  return spans;
}

}  // namespace detail

// Maximal contiguous entity spans of a BIO sequence.
inline std::vector<EntitySpan> tags_to_spans(std::span<const std::string> tags,
                                             TagMode mode) {
  return detail::decode_tags(tags, mode, nullptr);
}

inline std::vector<EntitySpan> tags_to_spans(std::span<const std::string> tags,
                                             TagMode mode, const LabelSet& labels) {
  return detail::decode_tags(tags, mode, &labels);
}

// Inverse of tags_to_spans in strict mode. Spans may be given in any order.
inline TagSequence spans_to_tags(std::span<const EntitySpan> spans,
                                 std::size_t length) {
  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(), span_before);
  validate_spans(sorted, length);
  TagSequence tags(length, std::string(kOutsideTag));
  for (const auto& s : sorted) {
    tags[s.start] = "B-" + s.label;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.label;
  }
  return tags;
}

// Canonical IOB2 form of a possibly malformed or IOB1 sequence.
inline TagSequence repair_tags(std::span<const std::string> tags) {
  return spans_to_tags(tags_to_spans(tags, TagMode::kRepair), tags.size());
}

inline TagSequence tags_of(const Sentence& sentence) {
  return spans_to_tags(sentence.spans, sentence.tokens.size());
}

inline std::string join_tokens(std::span<const std::string> tokens,
                               std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += sep;
    out += tokens[i];
  }
  return out;
}

inline TokenSequence split_whitespace(std::string_view text) {
  TokenSequence tokens;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace transfusion

#endif  // TRANSFUSION_NER_CORE_HPP_
