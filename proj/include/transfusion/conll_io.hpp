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

// CoNLL column files and dataset label remapping.

#ifndef TRANSFUSION_CONLL_IO_HPP_
#define TRANSFUSION_CONLL_IO_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/text_io.hpp"

namespace transfusion {

struct Document {
  std::vector<Sentence> sentences;
  std::string source_name;

  friend bool operator==(const Document&, const Document&) = default;
};

struct ColumnSpec {
  std::size_t token_column = 0;
  // Absent: the last column of each row. A row with a single column then
  // has no tag and is read as "O".
  std::optional<std::size_t> tag_column;
};

inline constexpr std::string_view kDocStart = "-DOCSTART-";

// One Sentence per blank-line separated block. Tags are decoded in repair
// mode, so IOB1 files come out in canonical IOB2. Blocks that start with a
// -DOCSTART- row are skipped.
inline Document parse_conll(std::string_view text, const ColumnSpec& columns = {},
                            std::string source_name = {}, std::string language = {}) {
  Document doc;
  doc.source_name = std::move(source_name);

  TokenSequence tokens;
  TagSequence tags;
  bool docstart = false;
  std::size_t block_line = 0;

  auto flush = [&]() {
    if (!tokens.empty() && !docstart) {
      std::vector<EntitySpan> spans;
      try {
        spans = tags_to_spans(tags, TagMode::kRepair);
      } catch (const InputError& e) {
        throw InputError("line " + std::to_string(block_line) + ": " + e.what());
      }
      doc.sentences.push_back(Sentence{std::move(tokens), std::move(spans), language});
    }
    tokens.clear();
    tags.clear();
    docstart = false;
  };

  const auto lines = split_lines(strip_bom(text));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const TokenSequence fields = split_whitespace(lines[n]);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (tokens.empty() && !docstart) block_line = n + 1;
    if (fields[0] == kDocStart) {
      docstart = true;
      continue;
    }
    const std::size_t needed =
        std::max(columns.token_column, columns.tag_column.value_or(0)) + 1;
    if (fields.size() < needed) {
      throw InputError("line " + std::to_string(n + 1) + ": expected at least " +
                       std::to_string(needed) + " columns, found " +
                       std::to_string(fields.size()));
    }
    tokens.push_back(fields[columns.token_column]);
    if (columns.tag_column) {
      tags.push_back(fields[*columns.tag_column]);
    } else if (fields.size() == 1) {
      tags.emplace_back(kOutsideTag);
    } else {
      tags.push_back(fields.back());
    }
    try {
      parse_tag(tags.back());
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  flush();
  return doc;
}

// Two-column "token tag" rows, a blank line after each sentence, LF endings.
inline std::string serialize_conll(const Document& doc) {
  std::string out;
  for (const auto& sentence : doc.sentences) {
    if (sentence.tokens.empty()) continue;
    const TagSequence tags = tags_of(sentence);
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      out += sentence.tokens[i];
      out += ' ';
      out += tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

inline Document read_conll(const std::filesystem::path& path, const ColumnSpec& columns = {},
                           std::string language = {}) {
  try {
    return parse_conll(read_text_file(path), columns, path.string(), std::move(language));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Label remapping

struct RemapRule {
  enum class Kind { kDrop, kMerge };

  Kind kind = Kind::kDrop;
  std::string from_label;
  std::optional<std::string> to_label;  // merge only

  static RemapRule drop(std::string label) {
    return {Kind::kDrop, std::move(label), std::nullopt};
  }
  static RemapRule merge(std::string from, std::string to) {
    return {Kind::kMerge, std::move(from), std::move(to)};
  }
};

// Label set after applying `rules` in order to `input`.
inline LabelSet remapped_labels(const LabelSet& input, const std::vector<RemapRule>& rules) {
  std::vector<std::string> names = input.names();
  for (const auto& rule : rules) {
    auto it = std::find(names.begin(), names.end(), rule.from_label);
    if (it == names.end()) {
      throw InputError("remap rule references unknown label '" + rule.from_label + "'");
    }
    if (rule.kind == RemapRule::Kind::kDrop) {
      if (rule.to_label) throw InputError("drop rule for '" + rule.from_label + "' has a target");
      names.erase(it);
      continue;
    }
    if (!rule.to_label || !is_valid_label(*rule.to_label)) {
      throw InputError("merge rule for '" + rule.from_label + "' needs a valid target label");
    }
    if (*rule.to_label == rule.from_label) continue;
    if (std::find(names.begin(), names.end(), *rule.to_label) == names.end()) {
      *it = *rule.to_label;
    } else {
      names.erase(it);
    }
  }
  return LabelSet(std::move(names));
}

// Rules apply in order, so a merge may feed a later drop. Span boundaries are
// never changed; adjacent spans that end up with the same label stay separate.
inline Document remap_labels(const Document& doc, const std::vector<RemapRule>& rules,
                             const LabelSet& input_labels) {
  remapped_labels(input_labels, rules);  // validates the rules
  Document out{{}, doc.source_name};
  out.sentences.reserve(doc.sentences.size());
  for (const auto& sentence : doc.sentences) {
    Sentence remapped{sentence.tokens, {}, sentence.language};
    for (const auto& span : sentence.spans) {
      if (!input_labels.contains(span.label)) {
        throw InputError("span label '" + span.label + "' is not in the input label set");
      }
      std::optional<std::string> label = span.label;
      for (const auto& rule : rules) {
        if (!label || *label != rule.from_label) continue;
        label = rule.kind == RemapRule::Kind::kDrop ? std::nullopt : rule.to_label;
      }
      if (label) remapped.spans.push_back({*label, span.start, span.end});
    }
    out.sentences.push_back(std::move(remapped));
  }
  return out;
}

}  // namespace transfusion

#endif  // TRANSFUSION_CONLL_IO_HPP_
