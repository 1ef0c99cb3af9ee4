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

#include "transfusion/projection.hpp"

#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "transfusion/services.hpp"

namespace transfusion {
namespace {

const LabelSet kLabels = LabelSet::conll();

std::string translate_one(const Translator& t, const std::string& text, const std::string& src,
                          const std::string& tgt) {
  return t.translate({{text}, src, tgt, true}).front();
}

TEST(ProjectByMarkersTest, IdentityTranslation) {
  const Sentence src{{"John", "lives", "in", "Paris"}, {{"PER", 0, 1}, {"LOC", 3, 4}}, "eng"};
  const IdentityTranslator mt;
  const auto marked = insert_markers(src, kLabels).text;
  const auto outcome =
      project_by_markers(src, translate_one(mt, marked, "eng", "tir"), kLabels, {.tgt_language = "tir"});
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(outcome.sentence->tokens, src.tokens);
  EXPECT_EQ(outcome.sentence->spans, src.spans);
  EXPECT_EQ(outcome.sentence->language, "tir");
}

TEST(ProjectByMarkersTest, DroppedClosingMarkerIsRejected) {
  const Sentence src{{"John", "lives", "in", "Paris"}, {{"PER", 0, 1}, {"LOC", 3, 4}}, "eng"};
  const auto outcome = project_by_markers(src, "<PER> John lives in <LOC> Paris </LOC>", kLabels);
  ASSERT_FALSE(outcome.ok());
  EXPECT_EQ(outcome.reason, "marker multiset mismatch");
  EXPECT_FALSE(outcome.sentence.has_value());
}

TEST(ProjectByMarkersTest, StrictModeRejectsDefects) {
  const Sentence src{{"a", "b"}, {{"PER", 0, 1}}, "eng"};
  auto outcome = project_by_markers(src, "<PER> a </PER> b </LOC>", kLabels,
                                    {.mode = ParseMode::kStrict});
  ASSERT_FALSE(outcome.ok());
  EXPECT_NE(outcome.reason.find("strict parse failed"), std::string::npos);
  // The same text is fine in lenient mode: the stray close is dropped.
  outcome = project_by_markers(src, "<PER> a </PER> b </LOC>", kLabels);
  EXPECT_TRUE(outcome.ok());
}

TEST(ProjectByMarkersTest, EmptyTranslationRejected) {
  const Sentence src{{"a"}, {}, "eng"};
  const auto outcome = project_by_markers(src, "", kLabels);
  ASSERT_FALSE(outcome.ok());
  EXPECT_FALSE(outcome.reason.empty());
}

// Reordering mock: expected target = reversed rotated tokens, spans mirrored.
TEST(ProjectByMarkersTest, ReorderingTranslatorMovesSpans) {
  const Sentence src{{"John", "met", "Mary", "in", "Addis", "Ababa"},
                     {{"PER", 0, 1}, {"LOC", 4, 6}},
                     "eng"};
  const DictionaryTranslator mt(7, /*reverse=*/true);
  const auto out = translate_one(mt, insert_markers(src, kLabels).text, "eng", "tir");
  const auto outcome = project_by_markers(src, out, kLabels, {.tgt_language = "tir"});
  ASSERT_TRUE(outcome.ok()) << outcome.reason;
  const std::size_t n = src.tokens.size();
  std::vector<EntitySpan> expected;
  for (auto it = src.spans.rbegin(); it != src.spans.rend(); ++it) {
    expected.push_back({it->label, n - it->end, n - it->start});
  }
  EXPECT_EQ(outcome.sentence->spans, expected);
  // Second oracle: a direct lenient parse of the translation.
  EXPECT_EQ(outcome.sentence->spans, parse_markers(out, kLabels, ParseMode::kLenient).spans);
  ASSERT_EQ(outcome.sentence->spans.size(), 2u);
}

TEST(ProjectByMarkersPropertyTest, IdentityReproducesLabelsAndRejectionIsTotal) {
  std::mt19937_64 rng(31);
  const IdentityTranslator mt;
  for (int i = 0; i < 300; ++i) {
    const Sentence src = testing::random_sentence(rng);
    const std::string marked = insert_markers(src, kLabels).text;
    auto outcome = project_by_markers(src, translate_one(mt, marked, "eng", "x"), kLabels,
                                      {.tgt_language = "eng"});
    ASSERT_TRUE(outcome.ok());
    EXPECT_EQ(*outcome.sentence, src);

    // Remove one random marker token: always rejected with a reason.
    if (src.spans.empty()) continue;
    auto tokens = split_whitespace(marked);
    std::vector<std::size_t> marker_positions;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (match_marker(tokens[k])) marker_positions.push_back(k);
    }
    tokens.erase(tokens.begin() +
                 static_cast<std::ptrdiff_t>(marker_positions[rng() % marker_positions.size()]));
    outcome = project_by_markers(src, join_tokens(tokens), kLabels);
    EXPECT_FALSE(outcome.ok());
    EXPECT_FALSE(outcome.reason.empty());
    EXPECT_FALSE(outcome.sentence.has_value());
  }
}

TEST(AlignmentParseTest, PharaohLines) {
  EXPECT_EQ(parse_alignment_line("0-3 1-4"),
            (std::vector<AlignmentLink>{{0, 3}, {1, 4}}));
  EXPECT_TRUE(parse_alignment_line("").empty());
  EXPECT_THROW(parse_alignment_line("3-x"), InputError);
  EXPECT_THROW(parse_alignment_line("3"), InputError);
  EXPECT_THROW(parse_alignment_line("-1-2"), InputError);
  try {
    parse_alignment_file("0-0\n1-1 3-x\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ProjectByAlignmentTest, ContiguousImage) {
  const Sentence src{{"a", "b", "c"}, {{"PER", 0, 2}}, "eng"};
  const TokenSequence tgt(6, "t");
  const auto out = project_by_alignment(src, {{0, 3}, {1, 4}}, tgt);
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"PER", 3, 5}}));
  EXPECT_EQ(out.tokens, tgt);
}

TEST(ProjectByAlignmentTest, UnalignedSpanDropped) {
  const Sentence src{{"a", "b"}, {{"LOC", 0, 1}}, "eng"};
  EXPECT_TRUE(project_by_alignment(src, {{1, 0}}, {"t", "u"}).spans.empty());
}

TEST(ProjectByAlignmentTest, OverlapKeepsLonger) {
  const Sentence src{{"a", "b"}, {{"PER", 0, 1}, {"ORG", 1, 2}}, "eng"};
  const auto out = project_by_alignment(src, {{0, 2}, {1, 1}, {1, 2}, {1, 3}}, TokenSequence(5, "t"));
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"ORG", 1, 4}}));
}

TEST(ProjectByAlignmentTest, HullAndTies) {
  // Non-contiguous image projects onto its hull.
  const Sentence src{{"a", "b", "c"}, {{"PER", 0, 1}, {"LOC", 2, 3}}, "eng"};
  auto out = project_by_alignment(src, {{0, 0}, {0, 3}, {2, 1}}, TokenSequence(4, "t"));
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"PER", 0, 4}}));
  // Equal length and start: smaller label wins.
  out = project_by_alignment(src, {{0, 1}, {2, 1}}, TokenSequence(4, "t"));
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"LOC", 1, 2}}));
}

TEST(ProjectByAlignmentTest, OutOfBoundsLink) {
  const Sentence src{{"a"}, {{"PER", 0, 1}}, "eng"};
  EXPECT_THROW(project_by_alignment(src, {{0, 2}}, {"t", "u"}), InputError);
  EXPECT_THROW(project_by_alignment(src, {{1, 0}}, {"t", "u"}), InputError);
}

TEST(ProjectByAlignmentPropertyTest, MonotoneIsIdentity) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const Sentence src = testing::random_sentence(rng);
    std::vector<AlignmentLink> links;
    for (std::size_t k = 0; k < src.tokens.size(); ++k) links.push_back({k, k});
    EXPECT_EQ(project_by_alignment(src, links, src.tokens).spans, src.spans);
  }
}

// Brute force over every subset of candidate images: the resolved set is the
// unique subset in which a candidate is kept iff no kept candidate of higher
// priority overlaps it.
std::vector<EntitySpan> brute_force_resolve(const std::vector<EntitySpan>& candidates) {
  auto higher = [](const EntitySpan& x, const EntitySpan& y) {
    if (x.length() != y.length()) return x.length() > y.length();
    if (x.start != y.start) return x.start < y.start;
    return x.label < y.label;
  };
  const std::size_t k = candidates.size();
  std::vector<std::vector<EntitySpan>> fixpoints;
  for (std::size_t mask = 0; mask < (1u << k); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      bool blocked = false;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i || !(mask >> j & 1)) continue;
        const bool j_first = higher(candidates[j], candidates[i]) ||
                             (!higher(candidates[i], candidates[j]) && j < i);
        if (j_first && candidates[j].overlaps(candidates[i])) blocked = true;
      }
      const bool kept = mask >> i & 1;
      if (kept == blocked) ok = false;
    }
    if (!ok) continue;
    std::vector<EntitySpan> chosen;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask >> i & 1) chosen.push_back(candidates[i]);
    }
    std::sort(chosen.begin(), chosen.end(), span_before);
    fixpoints.push_back(chosen);
  }
  EXPECT_EQ(fixpoints.size(), 1u);
  return fixpoints.front();
}

TEST(ProjectByAlignmentPropertyTest, MatchesBruteForceResolver) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 400; ++trial) {
    const Sentence src = testing::random_sentence(rng, 10, 5);
    const std::size_t m = testing::uniform(rng, 1, 8);
    std::vector<AlignmentLink> links;
    const std::size_t n_links = testing::uniform(rng, 0, 12);
    for (std::size_t k = 0; k < n_links; ++k) {
      links.push_back({rng() % src.tokens.size(), rng() % m});
    }
    std::vector<EntitySpan> candidates;
    for (const auto& s : src.spans) {
      std::vector<std::size_t> image;
      for (const auto& l : links) {
        if (l.src_index >= s.start && l.src_index < s.end) image.push_back(l.tgt_index);
      }
      if (image.empty()) continue;
      candidates.push_back({s.label, *std::min_element(image.begin(), image.end()),
                            *std::max_element(image.begin(), image.end()) + 1});
    }
    const TokenSequence tgt(m, "t");
    const Sentence out = project_by_alignment(src, links, tgt);
    EXPECT_EQ(out.spans, brute_force_resolve(candidates));
    EXPECT_NO_THROW(validate_sentence(out));
  }
}

}  // namespace
}  // namespace transfusion
