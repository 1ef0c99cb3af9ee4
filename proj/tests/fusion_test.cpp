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

#include "transfusion/fusion.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace transfusion {
namespace {

const LabelSet kLabels = LabelSet::conll();

TEST(BuildFusionInputTest, KuteluExample) {
  const Sentence src{{"Kutelu", "fell"}, {{"PER", 0, 1}}, "eng"};
  const TokenSequence tgt{"ku", "te", "lu", "wo"};
  const auto ex = build_fusion_input(src, tgt, std::vector<EntitySpan>{{"PER", 0, 3}},
                                     {kLabels, MarkerStyle::kXml, "tir"});
  EXPECT_EQ(ex.tokens, (TokenSequence{"<PER>", "Kutelu", "</PER>", "fell", "<X>", "ku", "te",
                                      "lu", "wo"}));
  EXPECT_EQ(ex.target_tags, (TagSequence{"IGN", "IGN", "IGN", "IGN", "IGN", "B-PER", "I-PER",
                                         "I-PER", "O"}));
  EXPECT_EQ(ex.loss_mask,
            (std::vector<bool>{false, false, false, false, false, true, true, true, true}));
  EXPECT_EQ(ex.segment_starts, (std::vector<std::size_t>{0, 5}));
  EXPECT_EQ(ex.src_lang, "eng");
  EXPECT_EQ(ex.tgt_lang, "tir");
  EXPECT_NO_THROW(validate_fusion_example(ex));
}

TEST(BuildFusionInputTest, NoSpansAnywhere) {
  const Sentence src{{"a", "b"}, {}, "eng"};
  const auto ex = build_fusion_input(src, {"c", "d", "e"}, std::vector<EntitySpan>{});
  EXPECT_EQ(ex.tokens.size(), 6u);
  EXPECT_EQ(ex.target_tags, (TagSequence{"IGN", "IGN", "IGN", "O", "O", "O"}));
}

TEST(BuildFusionInputTest, InferenceModeMatchesTrainingMask) {
  const Sentence src{{"Kutelu", "fell"}, {{"PER", 0, 1}}, "eng"};
  const TokenSequence tgt{"ku", "te", "lu", "wo"};
  const auto train = build_fusion_input(src, tgt, std::vector<EntitySpan>{{"PER", 0, 3}});
  const auto infer = build_fusion_input(src, tgt);
  EXPECT_EQ(train.loss_mask, infer.loss_mask);
  EXPECT_EQ(train.tokens, infer.tokens);
  EXPECT_EQ(infer.target_tags, (TagSequence{"IGN", "IGN", "IGN", "IGN", "IGN", "O", "O", "O", "O"}));
}

TEST(BuildFusionInputTest, InvalidTargetSpans) {
  const Sentence src{{"a"}, {}, "eng"};
  EXPECT_THROW(build_fusion_input(src, {"b"}, std::vector<EntitySpan>{{"PER", 0, 2}}), InputError);
  EXPECT_THROW(build_fusion_input(src, {"b", "c"},
                                  std::vector<EntitySpan>{{"PER", 0, 2}, {"LOC", 1, 2}}),
               InputError);
}

TEST(BuildMultisourceInputTest, DegenerateAndThreeSources) {
  const Sentence eng{{"John", "runs"}, {{"PER", 0, 1}}, "eng"};
  const Sentence deu{{"John", "läuft"}, {{"PER", 0, 1}}, "deu"};
  const Sentence spa{{"John", "corre"}, {{"PER", 0, 1}}, "spa"};
  const TokenSequence tgt{"Jon", "a"};
  const auto one = build_multisource_input(std::vector<Sentence>{eng}, tgt);
  const auto single = build_fusion_input(eng, tgt);
  EXPECT_EQ(one.tokens, single.tokens);
  EXPECT_EQ(one.target_tags, single.target_tags);
  EXPECT_EQ(one.loss_mask, single.loss_mask);

  const auto three = build_multisource_input(std::vector<Sentence>{eng, deu, spa}, tgt);
  EXPECT_EQ(std::count(three.tokens.begin(), three.tokens.end(), "<X>"), 3);
  EXPECT_EQ(three.segment_starts, (std::vector<std::size_t>{0, 5, 10, 15}));
  EXPECT_EQ(three.src_lang, "eng,deu,spa");
  EXPECT_NO_THROW(validate_fusion_example(three));
  EXPECT_THROW(build_multisource_input(std::vector<Sentence>{}, tgt), InputError);
}

TEST(BuildMultisourceInputTest, TokenCountArithmetic) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Sentence> sources(testing::uniform(rng, 1, 4));
    std::size_t expected = 0;
    for (auto& s : sources) {
      s = testing::random_sentence(rng);
      expected += s.tokens.size() + 2 * s.spans.size();
    }
    const Sentence tgt = testing::random_sentence(rng);
    expected += sources.size() + tgt.tokens.size();
    const auto ex = build_multisource_input(sources, tgt.tokens, tgt.spans, {kLabels});
    EXPECT_EQ(ex.tokens.size(), expected);
    EXPECT_NO_THROW(validate_fusion_example(ex));
    // Loss positions are exactly the target, carrying its strict BIO tags.
    const std::size_t start = ex.target_start();
    EXPECT_EQ(start, expected - tgt.tokens.size());
    EXPECT_EQ(TagSequence(ex.target_tags.begin() + static_cast<std::ptrdiff_t>(start),
                          ex.target_tags.end()),
              tags_of(tgt));
    // The first source segment parses back to the source sentence.
    const TokenSequence seg(ex.tokens.begin(),
                            ex.tokens.begin() + static_cast<std::ptrdiff_t>(ex.segment_starts[1] - 1));
    Sentence parsed = parse_markers(join_tokens(seg), kLabels, ParseMode::kStrict);
    parsed.language = sources[0].language;
    EXPECT_EQ(parsed, sources[0]);
  }
}

TEST(FusionJsonTest, FieldOrderAndRoundtrip) {
  const Sentence src{{"Kutelu", "fell"}, {{"PER", 0, 1}}, "eng"};
  const auto ex = build_fusion_input(src, {"ku", "wo"}, std::vector<EntitySpan>{{"PER", 0, 1}},
                                     {kLabels, MarkerStyle::kXml, "tir"});
  EXPECT_EQ(to_jsonl_line(ex),
            R"({"tokens":["<PER>","Kutelu","</PER>","fell","<X>","ku","wo"],)"
            R"("tags":["IGN","IGN","IGN","IGN","IGN","B-PER","O"],"mask":[0,0,0,0,0,1,1],)"
            R"("segments":[0,5],"src_lang":"eng","tgt_lang":"tir"})"
            "\n");
  const auto back = fusion_example_from_json(nlohmann::json::parse(to_jsonl_line(ex)));
  EXPECT_EQ(back.tokens, ex.tokens);
  EXPECT_EQ(back.target, ex.target);
  EXPECT_EQ(back.sources.size(), 1u);
  EXPECT_EQ(back.sources[0].text, ex.sources[0].text);
  auto broken = nlohmann::json::parse(to_jsonl_line(ex));
  broken["mask"][0] = 1;
  EXPECT_THROW(fusion_example_from_json(broken), InputError);
}

// ---------------------------------------------------------------------------

class FailingTranslator : public Translator {
 protected:
  std::vector<std::string> do_translate(const TranslateRequest&) const override {
    throw BackendError("connection refused");
  }
};

TEST(BuildMixedTrainsetTest, IdentityTranslator) {
  std::mt19937_64 rng(61);
  const Document doc = testing::random_document(rng, 40);
  const auto data = build_mixed_trainset(doc, IdentityTranslator(), "tir",
                                         {.labels = kLabels, .batching = {7, 3}});
  ASSERT_EQ(data.examples.size(), doc.sentences.size());
  EXPECT_EQ(data.totals().rejected, 0u);
  EXPECT_EQ(data.per_language.at("tir").accepted, doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& ex = data.examples[i];
    EXPECT_EQ(ex.target, doc.sentences[i].tokens);
    EXPECT_EQ(TagSequence(ex.target_tags.begin() + static_cast<std::ptrdiff_t>(ex.target_start()),
                          ex.target_tags.end()),
              tags_of(doc.sentences[i]));
  }
}

TEST(BuildMixedTrainsetTest, CorruptedSentenceIsRejected) {
  Document doc;
  for (int i = 0; i < 6; ++i) {
    doc.sentences.push_back({{"w" + std::to_string(i), "Paris"}, {{"LOC", 1, 2}}, "eng"});
  }
  doc.sentences[3].tokens[0] = "BAD";
  const MarkerCorruptingTranslator mt(std::make_shared<IdentityTranslator>(), "BAD");
  const auto data = build_mixed_trainset(doc, mt, "tir", {.labels = kLabels});
  EXPECT_EQ(data.examples.size(), 5u);
  EXPECT_EQ(data.totals().accepted, 5u);
  EXPECT_EQ(data.totals().rejected, 1u);
  ASSERT_EQ(data.rejections.size(), 1u);
  EXPECT_EQ(data.rejections[0].index, 3u);
  EXPECT_EQ(data.rejections[0].reason, "marker multiset mismatch");
}

TEST(BuildMixedTrainsetTest, DictionaryMockRecoversSourceLabels) {
  std::mt19937_64 rng(62);
  const Document doc = testing::random_document(rng, 60);
  const DictionaryTranslator mt(7, true);
  const auto data = build_mixed_trainset(doc, mt, "wol", {.labels = kLabels});
  ASSERT_EQ(data.examples.size(), doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& src = doc.sentences[i];
    const auto& ex = data.examples[i];
    // Mock inverse: un-reverse, un-rotate.
    TokenSequence tokens(ex.target.rbegin(), ex.target.rend());
    for (auto& t : tokens) t = mt.map_token(t, false);
    EXPECT_EQ(tokens, src.tokens);
    const auto spans = tags_to_spans(
        std::span<const std::string>(ex.target_tags).subspan(ex.target_start()), TagMode::kStrict);
    const std::size_t n = src.tokens.size();
    std::vector<EntitySpan> unmirrored;
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
      unmirrored.push_back({it->label, n - it->end, n - it->start});
    }
    EXPECT_EQ(unmirrored, src.spans);
  }
}

TEST(BuildMixedTrainsetTest, SourceOnlyExamplesAndDeterminism) {
  std::mt19937_64 rng(63);
  const Document doc = testing::random_document(rng, 25);
  const DictionaryTranslator mt(3, true);
  const auto a = build_mixed_trainset(
      doc, mt, "wol", {.labels = kLabels, .batching = {2, 8}, .include_source_only = true});
  const auto b = build_mixed_trainset(
      doc, mt, "wol", {.labels = kLabels, .batching = {100, 1}, .include_source_only = true});
  ASSERT_EQ(a.examples.size(), 50u);
  for (std::size_t i = 0; i < a.examples.size(); ++i) {
    EXPECT_EQ(to_jsonl_line(a.examples[i]), to_jsonl_line(b.examples[i]));
  }
  EXPECT_EQ(a.examples[1].target, doc.sentences[0].tokens);
  EXPECT_EQ(a.examples[1].tgt_lang, "eng");
}

TEST(BuildMixedTrainsetTest, TransportErrorCarriesContext) {
  std::mt19937_64 rng(64);
  const Document doc = testing::random_document(rng, 10);
  try {
    build_mixed_trainset(doc, FailingTranslator(), "tir", {.labels = kLabels, .batching = {4, 1}});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("sentences [0, 4)"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("connection refused"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------

Sentence wolof_prediction() {
  return {{"Manchester", "City", "waroon", "naa", "denc", "benn", "poñ", "ngir", "bokk", "ci",
           "ñi", "raw", "."},
          {{"LOC", 0, 2}},
          "wol"};
}

Document english_gold(const std::string& label) {
  return {{Sentence{{"Manchester", "City", "should", "have", "saved", "one", "point", "to", "be",
                     "among", "the", "winners."},
                    {{label, 0, 2}},
                    "eng"}},
          {}};
}

testing::TableTranslator wolof_to_english() {
  return testing::TableTranslator(
      {{"<LOC> Manchester City </LOC> waroon naa denc benn poñ ngir bokk ci ñi raw .",
        "<LOC> Manchester City </LOC> should have saved one point to be among the winners."}});
}

TEST(TranslateCorrectTest, DisagreeingLabelIsCorrected) {
  const OracleTagger tagger(english_gold("ORG"));
  const auto out = translate_correct(wolof_prediction(), wolof_to_english(), tagger);
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"ORG", 0, 2}}));
  EXPECT_EQ(out.tokens, wolof_prediction().tokens);
}

TEST(TranslateCorrectTest, AgreeingTaggerChangesNothing) {
  const OracleTagger tagger(english_gold("LOC"));
  EXPECT_EQ(translate_correct(wolof_prediction(), wolof_to_english(), tagger), wolof_prediction());
}

TEST(TranslateCorrectTest, LostMarkersKeepOriginalLabel) {
  const testing::TableTranslator mt(
      {{"<LOC> Manchester City </LOC> waroon naa denc benn poñ ngir bokk ci ñi raw .",
        "Manchester City should have saved one point to be among the winners."}});
  const OracleTagger tagger(english_gold("ORG"));
  EXPECT_EQ(translate_correct(wolof_prediction(), mt, tagger), wolof_prediction());
}

TEST(TranslateCorrectTest, ExtentMismatchLeavesSpan) {
  const testing::TableTranslator mt(
      {{"<LOC> Manchester City </LOC> waroon naa denc benn poñ ngir bokk ci ñi raw .",
        "<LOC> Manchester </LOC> City should have saved one point to be among the winners."}});
  const OracleTagger tagger(english_gold("ORG"));
  EXPECT_EQ(translate_correct(wolof_prediction(), mt, tagger), wolof_prediction());
}

TEST(TranslateCorrectTest, OnlyMatchingSpanIsRelabeled) {
  // Second entity keeps its label; the first is corrected.
  const Sentence pred{{"a", "b", "c", "d"}, {{"LOC", 0, 1}, {"PER", 2, 4}}, "wol"};
  const testing::TableTranslator mt(
      {{"<LOC> a </LOC> b <PER> c d </PER>", "<LOC> A </LOC> B <PER> C D </PER>"}});
  const OracleTagger tagger(Document{{Sentence{{"A", "B", "C", "D"}, {{"ORG", 0, 1}, {"PER", 2, 4}}, "eng"}}, {}});
  const auto out = translate_correct(pred, mt, tagger);
  EXPECT_EQ(out.spans, (std::vector<EntitySpan>{{"ORG", 0, 1}, {"PER", 2, 4}}));
}

TEST(TranslateCorrectPropertyTest, OnlyLabelsChange) {
  std::mt19937_64 rng(71);
  Document preds;
  for (int i = 0; i < 80; ++i) {
    Sentence s = testing::random_sentence(rng);
    s.tokens.push_back("#" + std::to_string(i));
    s.language = "wol";
    preds.sentences.push_back(s);
  }
  // English side: the identity translation with random gold labels.
  Document english;
  for (const auto& s : preds.sentences) {
    Sentence e = s;
    e.language = "eng";
    for (auto& span : e.spans) span.label = testing::label_pool()[rng() % 3];
    english.sentences.push_back(e);
  }
  const NoisyTagger tagger(english, 0.3, 5);
  const auto out = translate_correct(preds, IdentityTranslator(), tagger,
                                     {.tgt_lang = "wol", .batching = {9, 4}});
  ASSERT_EQ(out.sentences.size(), preds.sentences.size());
  for (std::size_t i = 0; i < preds.sentences.size(); ++i) {
    const auto& a = preds.sentences[i];
    const auto& b = out.sentences[i];
    EXPECT_EQ(a.tokens, b.tokens);
    ASSERT_EQ(a.spans.size(), b.spans.size());
    for (std::size_t k = 0; k < a.spans.size(); ++k) {
      EXPECT_EQ(a.spans[k].start, b.spans[k].start);
      EXPECT_EQ(a.spans[k].end, b.spans[k].end);
    }
  }
}

// ---------------------------------------------------------------------------

TEST(BuildInferenceInputsTest, TranslateAnnotateAssemble) {
  std::mt19937_64 rng(81);
  const DictionaryTranslator mt(4, true);
  // English gold and its target-language rendering under the mock.
  Document eng = testing::random_document(rng, 30);
  Document tgt;
  for (const auto& s : eng.sentences) {
    const auto out = mt.translate({{join_tokens(s.tokens)}, "eng", "tir", false}).front();
    tgt.sentences.push_back({split_whitespace(out), {}, "tir"});
  }
  const OracleTagger eng_tagger(eng);
  const std::vector<SourceAnnotator> annotators{{"eng", &eng_tagger}};
  const auto examples =
      build_inference_inputs(tgt, mt, annotators, {.tgt_lang = "tir", .batching = {4, 3}});
  ASSERT_EQ(examples.size(), eng.sentences.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    EXPECT_EQ(ex.target, tgt.sentences[i].tokens);
    Sentence parsed = parse_markers(ex.sources[0], ParseMode::kStrict);
    EXPECT_EQ(parsed.tokens, eng.sentences[i].tokens);
    EXPECT_EQ(parsed.spans, eng.sentences[i].spans);
    EXPECT_NO_THROW(validate_fusion_example(ex));
  }
}

}  // namespace
}  // namespace transfusion
