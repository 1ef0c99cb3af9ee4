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

// Label projection across parallel sentences: mark-then-translate and
// word-alignment projection.

#ifndef TRANSFUSION_PROJECTION_HPP_
#define TRANSFUSION_PROJECTION_HPP_

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"
#include "transfusion/marker_codec.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/text_io.hpp"

namespace transfusion {

struct AlignmentLink {
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;

  friend bool operator==(const AlignmentLink&, const AlignmentLink&) = default;
};

struct ProjectionOutcome {
  enum class Status { kProjected, kRejected };

  Status status = Status::kRejected;
  std::optional<Sentence> sentence;  // iff projected
  std::string reason;                // iff rejected

  static ProjectionOutcome projected(Sentence s) {
    return {Status::kProjected, std::move(s), {}};
  }
  static ProjectionOutcome rejected(std::string why) {
    return {Status::kRejected, std::nullopt, std::move(why)};
  }

  bool ok() const { return status == Status::kProjected; }
};

struct MarkerProjectionOptions {
  ParseMode mode = ParseMode::kLenient;
  MarkerStyle style = MarkerStyle::kXml;
  std::string tgt_language;
};

// `translated_marked` is the MT output for insert_markers(src). Never throws
// on a bad translation; it is reported as a rejected outcome instead.
inline ProjectionOutcome project_by_markers(const Sentence& src,
                                            std::string_view translated_marked,
                                            const LabelSet& labels,
                                            const MarkerProjectionOptions& options = {}) {
  const MarkedText before = insert_markers(src, labels, options.style);
  const MarkedText after{std::string(translated_marked), labels, options.style};
  if (options.mode == ParseMode::kStrict) {
    try {
      parse_markers(after, ParseMode::kStrict);
    } catch (const InputError& e) {
      return ProjectionOutcome::rejected(std::string("strict parse failed: ") + e.what());
    }
  }
  if (!markers_consistent(before, after)) {
    return ProjectionOutcome::rejected("marker multiset mismatch");
  }
  Sentence projected = parse_markers(after, ParseMode::kLenient);
  if (projected.tokens.empty()) return ProjectionOutcome::rejected("empty translation");
  projected.language = options.tgt_language;
  return ProjectionOutcome::projected(std::move(projected));
}

// ---------------------------------------------------------------------------
// Alignment projection

// Parses one line of Pharaoh "i-j i-j ..." links.
inline std::vector<AlignmentLink> parse_alignment_line(std::string_view line) {
  std::vector<AlignmentLink> links;
  for (const auto& item : split_whitespace(line)) {
    const auto dash = item.find('-');
    auto parse_index = [&item](std::string_view digits) {
      std::size_t value = 0;
      const char* end = digits.data() + digits.size();
      auto [ptr, ec] = std::from_chars(digits.data(), end, value);
      if (digits.empty() || ec != std::errc() || ptr != end) {
        throw InputError("malformed alignment link '" + item + "'");
      }
      return value;
    };
    if (dash == std::string::npos) throw InputError("malformed alignment link '" + item + "'");
    const std::string_view view(item);
    links.push_back({parse_index(view.substr(0, dash)), parse_index(view.substr(dash + 1))});
  }
  return links;
}

// One entry per line; errors carry the 1-based line number.
inline std::vector<std::vector<AlignmentLink>> parse_alignment_file(std::string_view text) {
  std::vector<std::vector<AlignmentLink>> out;
  const auto lines = split_lines(strip_bom(text));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    try {
      out.push_back(parse_alignment_line(lines[n]));
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

// Projects each source span onto the convex hull [min, max] of the target
// tokens aligned to it; spans with no aligned target token are dropped.
// Overlapping images are resolved in favour of the longer span, then the
// smaller start, then the lexicographically smaller label.
inline Sentence project_by_alignment(const Sentence& src, const std::vector<AlignmentLink>& links,
                                     const TokenSequence& tgt_tokens,
                                     std::string tgt_language = {}) {
  for (const auto& link : links) {
    if (link.src_index >= src.tokens.size() || link.tgt_index >= tgt_tokens.size()) {
      throw InputError("alignment link " + std::to_string(link.src_index) + "-" +
                       std::to_string(link.tgt_index) + " is out of bounds (" +
                       std::to_string(src.tokens.size()) + " source, " +
                       std::to_string(tgt_tokens.size()) + " target tokens)");
    }
  }

  std::vector<EntitySpan> candidates;
  for (const auto& span : src.spans) {
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    for (const auto& link : links) {
      if (link.src_index < span.start || link.src_index >= span.end) continue;
      lo = std::min(lo, link.tgt_index);
      hi = std::max(hi, link.tgt_index);
    }
    if (lo <= hi) candidates.push_back({span.label, lo, hi + 1});
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.length() != y.length()) return x.length() > y.length();
    if (x.start != y.start) return x.start < y.start;
    return x.label < y.label;
  });

  Sentence out{tgt_tokens, {}, std::move(tgt_language)};
  for (std::size_t idx : order) {
    const auto& candidate = candidates[idx];
    const bool clash = std::any_of(out.spans.begin(), out.spans.end(),
                                   [&](const EntitySpan& kept) { return kept.overlaps(candidate); });
    if (!clash) out.spans.push_back(candidate);
  }
  std::sort(out.spans.begin(), out.spans.end(), span_before);
  return out;
}

}  // namespace transfusion

#endif  // TRANSFUSION_PROJECTION_HPP_
