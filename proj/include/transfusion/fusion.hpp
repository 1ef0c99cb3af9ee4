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

// Fusion model inputs and the pipelines that produce them.
//
// A fusion example concatenates one or more marked high-resource sentences
// with the low-resource sentence:
//
//   <PER> Kutelu </PER> fell <X> ku te lu wo
//   IGN   IGN    IGN    IGN  IGN B-PER I-PER I-PER O
//
// Only the final (low-resource) segment carries real tags and contributes
// to the training loss.

#ifndef TRANSFUSION_FUSION_HPP_
#define TRANSFUSION_FUSION_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "transfusion/batching.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/marker_codec.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/projection.hpp"
#include "transfusion/services.hpp"

namespace transfusion {

inline constexpr std::string_view kSeparatorToken = "<X>";
inline constexpr std::string_view kIgnoreTag = "IGN";

struct FusionExample {
  std::vector<MarkedText> sources;  // marked high-resource segments, in order
  TokenSequence target;             // low-resource segment
  TokenSequence tokens;             // sources, <X> separators, target
  TagSequence target_tags;          // IGN outside the target segment
  std::vector<bool> loss_mask;      // true exactly on the target segment
  std::vector<std::size_t> segment_starts;  // first token index of each segment
  std::string src_lang;             // comma-joined for multiple sources
  std::string tgt_lang;

  std::size_t target_start() const { return segment_starts.back(); }
};

struct FusionOptions {
  std::optional<LabelSet> labels;  // absent: labels of the source spans
  MarkerStyle style = MarkerStyle::kXml;
  std::string tgt_lang;
};

// Sources are marked and joined by <X>; `tgt_spans` absent means inference,
// where the target carries all-O placeholder tags.
inline FusionExample build_multisource_input(
    std::span<const Sentence> sources, const TokenSequence& tgt_tokens,
    const std::optional<std::vector<EntitySpan>>& tgt_spans = std::nullopt,
    const FusionOptions& options = {}) {
  if (sources.empty()) throw InputError("fusion input needs at least one source sentence");

  TagSequence target_tags;
  if (tgt_spans) {
    target_tags = spans_to_tags(*tgt_spans, tgt_tokens.size());
  } else {
    target_tags.assign(tgt_tokens.size(), std::string(kOutsideTag));
  }
  validate_sentence(Sentence{tgt_tokens, {}, {}});

  FusionExample ex;
  ex.tgt_lang = options.tgt_lang;
  for (const auto& src : sources) {
    const LabelSet labels = options.labels ? *options.labels : labels_of(src.spans);
    MarkedText marked = insert_markers(src, labels, options.style);
    ex.segment_starts.push_back(ex.tokens.size());
    for (auto& token : split_whitespace(marked.text)) ex.tokens.push_back(std::move(token));
    ex.tokens.emplace_back(kSeparatorToken);
    ex.sources.push_back(std::move(marked));
    if (!ex.src_lang.empty()) ex.src_lang += ',';
    ex.src_lang += src.language;
  }
  const std::size_t prefix = ex.tokens.size();
  ex.segment_starts.push_back(prefix);
  ex.target = tgt_tokens;
  ex.tokens.insert(ex.tokens.end(), tgt_tokens.begin(), tgt_tokens.end());

  ex.target_tags.assign(prefix, std::string(kIgnoreTag));
  ex.target_tags.insert(ex.target_tags.end(), target_tags.begin(), target_tags.end());
  ex.loss_mask.assign(prefix, false);
  ex.loss_mask.resize(ex.tokens.size(), true);
  return ex;
}

inline FusionExample build_fusion_input(
    const Sentence& src, const TokenSequence& tgt_tokens,
    const std::optional<std::vector<EntitySpan>>& tgt_spans = std::nullopt,
    const FusionOptions& options = {}) {
  return build_multisource_input(std::span<const Sentence>(&src, 1), tgt_tokens, tgt_spans,
                                 options);
}

// Throws InputError if `ex` breaks a structural invariant.
inline void validate_fusion_example(const FusionExample& ex) {
  const std::size_t n = ex.tokens.size();
  if (ex.target_tags.size() != n || ex.loss_mask.size() != n) {
    throw InputError("fusion example tokens, tags and mask differ in length");
  }
  if (ex.segment_starts.size() < 2 || ex.segment_starts.front() != 0) {
    throw InputError("fusion example needs a source and a target segment starting at 0");
  }
  for (std::size_t s = 1; s < ex.segment_starts.size(); ++s) {
    const std::size_t start = ex.segment_starts[s];
    if (start == 0 || start > n || start <= ex.segment_starts[s - 1] ||
        ex.tokens[start - 1] != kSeparatorToken) {
      throw InputError("segment " + std::to_string(s) + " is not preceded by a separator");
    }
  }
  const std::size_t target = ex.segment_starts.back();
  std::size_t separators = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ex.tokens[i] == kSeparatorToken) ++separators;
    const bool in_target = i >= target;
    if (ex.loss_mask[i] != in_target) {
      throw InputError("loss mask wrong at position " + std::to_string(i));
    }
    if (!in_target && ex.target_tags[i] != kIgnoreTag) {
      throw InputError("masked position " + std::to_string(i) + " is not IGN");
    }
  }
  if (separators + 1 != ex.segment_starts.size()) {
    throw InputError("separator count does not match segment count");
  }
  tags_to_spans(std::span<const std::string>(ex.target_tags).subspan(target), TagMode::kStrict);
}

// JSONL record: tokens, tags, mask, segments, src_lang, tgt_lang (in that order).
inline nlohmann::ordered_json to_json(const FusionExample& ex) {
  nlohmann::ordered_json j;
  j["tokens"] = ex.tokens;
  j["tags"] = ex.target_tags;
  std::vector<int> mask(ex.loss_mask.begin(), ex.loss_mask.end());
  j["mask"] = mask;
  j["segments"] = ex.segment_starts;
  j["src_lang"] = ex.src_lang;
  j["tgt_lang"] = ex.tgt_lang;
  return j;
}

inline std::string to_jsonl_line(const FusionExample& ex) { return to_json(ex).dump() + "\n"; }

// Reads a JSONL record back. Marker labels of each source segment are taken
// from the markers themselves.
inline FusionExample fusion_example_from_json(const nlohmann::json& j,
                                              MarkerStyle style = MarkerStyle::kXml) {
  FusionExample ex;
  try {
    ex.tokens = j.at("tokens").get<TokenSequence>();
    ex.target_tags = j.at("tags").get<TagSequence>();
    for (int m : j.at("mask").get<std::vector<int>>()) ex.loss_mask.push_back(m != 0);
    ex.segment_starts = j.at("segments").get<std::vector<std::size_t>>();
    ex.src_lang = j.at("src_lang").get<std::string>();
    ex.tgt_lang = j.at("tgt_lang").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad fusion example record: ") + e.what());
  }
  validate_fusion_example(ex);
  for (std::size_t s = 0; s + 1 < ex.segment_starts.size(); ++s) {
    const auto first = ex.tokens.begin() + static_cast<std::ptrdiff_t>(ex.segment_starts[s]);
    const auto last = ex.tokens.begin() + static_cast<std::ptrdiff_t>(ex.segment_starts[s + 1] - 1);
    TokenSequence segment(first, last);
    LabelSet labels;
    for (const auto& token : segment) {
      if (auto m = match_marker(token, style)) labels.add(std::string(m->label));
    }
    ex.sources.push_back({join_tokens(segment), std::move(labels), style});
  }
  ex.target.assign(ex.tokens.begin() + static_cast<std::ptrdiff_t>(ex.target_start()),
                   ex.tokens.end());
  return ex;
}

// ---------------------------------------------------------------------------
// Training set

struct ProjectionStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct Rejection {
  std::size_t index = 0;  // sentence index in the source document
  std::string reason;
};

struct MixedDataset {
  std::vector<FusionExample> examples;
  std::map<std::string, ProjectionStats> per_language;
  std::vector<Rejection> rejections;

  ProjectionStats totals() const {
    ProjectionStats t;
    for (const auto& [lang, s] : per_language) {
      t.accepted += s.accepted;
      t.rejected += s.rejected;
    }
    return t;
  }
};

struct TrainsetOptions {
  std::string src_lang = "eng";
  std::optional<LabelSet> labels;  // absent: every label seen in the source document
  MarkerStyle style = MarkerStyle::kXml;
  ParseMode mode = ParseMode::kLenient;
  BatchOptions batching;
  // Also emit, after each sentence, an example whose target segment is the
  // source sentence itself.
  bool include_source_only = false;
};

namespace detail {

inline LabelSet document_labels(const Document& doc) {
  LabelSet labels;
  for (const auto& s : doc.sentences) {
    for (const auto& span : s.spans) labels.add(span.label);
  }
  return labels;
}

inline std::string range_context(std::size_t begin, std::size_t end) {
  return "sentences [" + std::to_string(begin) + ", " + std::to_string(end) + ")";
}

// Translates `texts` in batches; empty texts are not sent and come back empty.
inline std::vector<std::string> translate_all(const Translator& translator,
                                              const std::vector<std::string>& texts,
                                              const std::string& src_lang,
                                              const std::string& tgt_lang, bool preserve_markers,
                                              const BatchOptions& batching) {
  return run_batched<std::string>(
      texts.size(), batching, [&](std::size_t begin, std::size_t end) {
        TranslateRequest req{{}, src_lang, tgt_lang, preserve_markers};
        std::vector<std::size_t> sent;
        for (std::size_t i = begin; i < end; ++i) {
          if (texts[i].empty()) continue;
          req.texts.push_back(texts[i]);
          sent.push_back(i - begin);
        }
        std::vector<std::string> out(end - begin);
        if (req.texts.empty()) return out;
        std::vector<std::string> translated;
        try {
          translated = translator.translate(req);
        } catch (const BackendError& e) {
          throw BackendError(range_context(begin, end) + ": " + e.what());
        }
        for (std::size_t k = 0; k < sent.size(); ++k) out[sent[k]] = std::move(translated[k]);
        return out;
      });
}

// Tags `sentences` in batches; empty sentences are not sent and get no tags.
inline std::vector<TagSequence> tag_all(const Tagger& tagger,
                                        const std::vector<TokenSequence>& sentences,
                                        const std::string& language, const LabelSet& labels,
                                        const BatchOptions& batching) {
  return run_batched<TagSequence>(
      sentences.size(), batching, [&](std::size_t begin, std::size_t end) {
        TagRequest req{{}, language, labels};
        std::vector<std::size_t> sent;
        for (std::size_t i = begin; i < end; ++i) {
          if (sentences[i].empty()) continue;
          req.sentences.push_back(sentences[i]);
          sent.push_back(i - begin);
        }
        std::vector<TagSequence> out(end - begin);
        if (req.sentences.empty()) return out;
        std::vector<TagSequence> tagged;
        try {
          tagged = tagger.tag(req);
        } catch (const BackendError& e) {
          throw BackendError(range_context(begin, end) + ": " + e.what());
        }
        for (std::size_t k = 0; k < sent.size(); ++k) out[sent[k]] = std::move(tagged[k]);
        return out;
      });
}

}  // namespace detail

// Translates every marked source sentence into `tgt_lang`, projects its
// labels through the markers and pairs each accepted projection with its
// source. Rejected projections are counted and skipped.
inline MixedDataset build_mixed_trainset(const Document& src_doc, const Translator& translator,
                                         const std::string& tgt_lang,
                                         const TrainsetOptions& options = {}) {
  const LabelSet labels = options.labels ? *options.labels : detail::document_labels(src_doc);
  std::vector<std::string> marked;
  marked.reserve(src_doc.sentences.size());
  for (const auto& s : src_doc.sentences) {
    marked.push_back(insert_markers(s, labels, options.style).text);
  }
  const auto translated = detail::translate_all(translator, marked, options.src_lang, tgt_lang,
                                                true, options.batching);

  MixedDataset out;
  ProjectionStats& stats = out.per_language[tgt_lang];
  const FusionOptions fusion{labels, options.style, tgt_lang};
  for (std::size_t i = 0; i < src_doc.sentences.size(); ++i) {
    Sentence src = src_doc.sentences[i];
    if (src.language.empty()) src.language = options.src_lang;
    const auto outcome = project_by_markers(src, translated[i], labels,
                                            {options.mode, options.style, tgt_lang});
    if (outcome.ok()) {
      ++stats.accepted;
      out.examples.push_back(
          build_fusion_input(src, outcome.sentence->tokens, outcome.sentence->spans, fusion));
    } else {
      ++stats.rejected;
      out.rejections.push_back({i, outcome.reason});
    }
    if (options.include_source_only && !src.tokens.empty()) {
      out.examples.push_back(build_fusion_input(src, src.tokens, src.spans,
                                                {labels, options.style, src.language}));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inference inputs

struct InferenceOptions {
  std::string tgt_lang;  // falls back to each sentence's language
  LabelSet labels = LabelSet::conll();
  MarkerStyle style = MarkerStyle::kXml;
  BatchOptions batching;
};

struct SourceAnnotator {
  std::string language;
  const Tagger* tagger = nullptr;
};

// Translate-and-annotate: each target sentence is translated into every
// source language and tagged there by that language's tagger.
// Result[k][i] is sentence i in source language k.
inline std::vector<std::vector<Sentence>> annotate_translations(
    const Document& tgt_doc, const Translator& translator,
    std::span<const SourceAnnotator> annotators, const InferenceOptions& options) {
  if (annotators.empty()) throw InputError("at least one source language is required");
  std::string tgt_lang = options.tgt_lang;
  if (tgt_lang.empty() && !tgt_doc.sentences.empty()) tgt_lang = tgt_doc.sentences[0].language;

  std::vector<std::string> texts;
  texts.reserve(tgt_doc.sentences.size());
  for (const auto& s : tgt_doc.sentences) texts.push_back(join_tokens(s.tokens));

  std::vector<std::vector<Sentence>> out;
  for (const auto& annotator : annotators) {
    if (annotator.tagger == nullptr) {
      throw InputError("no tagger configured for language '" + annotator.language + "'");
    }
    const auto translated = detail::translate_all(translator, texts, tgt_lang,
                                                  annotator.language, false, options.batching);
    std::vector<TokenSequence> tokens;
    tokens.reserve(translated.size());
    for (const auto& t : translated) tokens.push_back(split_whitespace(t));
    const auto tags = detail::tag_all(*annotator.tagger, tokens, annotator.language,
                                      options.labels, options.batching);
    std::vector<Sentence> annotated;
    annotated.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      std::vector<EntitySpan> spans;
      try {
        spans = tags_to_spans(tags[i], TagMode::kRepair, options.labels);
      } catch (const InputError& e) {
        throw ProtocolError("tagger output for sentence " + std::to_string(i) + ": " + e.what());
      }
      annotated.push_back({std::move(tokens[i]), std::move(spans), annotator.language});
    }
    out.push_back(std::move(annotated));
  }
  return out;
}

// Inference-mode fusion inputs, one per target sentence.
inline std::vector<FusionExample> build_inference_inputs(
    const Document& tgt_doc, const Translator& translator,
    std::span<const SourceAnnotator> annotators, const InferenceOptions& options) {
  const auto annotated = annotate_translations(tgt_doc, translator, annotators, options);
  std::vector<FusionExample> out;
  out.reserve(tgt_doc.sentences.size());
  for (std::size_t i = 0; i < tgt_doc.sentences.size(); ++i) {
    std::vector<Sentence> sources;
    for (const auto& per_language : annotated) sources.push_back(per_language[i]);
    const auto& tgt = tgt_doc.sentences[i];
    out.push_back(build_multisource_input(
        sources, tgt.tokens, std::nullopt,
        {options.labels, options.style, options.tgt_lang.empty() ? tgt.language : options.tgt_lang}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Translate-correct

struct TranslateCorrectOptions {
  std::string src_lang = "eng";
  std::string tgt_lang;  // falls back to each sentence's language
  LabelSet labels = LabelSet::conll();
  MarkerStyle style = MarkerStyle::kXml;
  BatchOptions batching;
};

namespace detail {

// Relabels spans of `pred` whose projection into the translation has exactly
// the extent of a tagger span with a different label. Projected span j is
// matched to the next input span, in order, that has the same label.
inline Sentence apply_corrections(const Sentence& pred, const Sentence& projected,
                                  const std::vector<EntitySpan>& tagged) {
  Sentence out = pred;
  std::size_t next = 0;
  for (const auto& p : projected.spans) {
    while (next < pred.spans.size() && pred.spans[next].label != p.label) ++next;
    if (next == pred.spans.size()) break;
    for (const auto& t : tagged) {
      if (t.start == p.start && t.end == p.end && t.label != p.label) {
        out.spans[next].label = t.label;
        break;
      }
    }
    ++next;
  }
  return out;
}

}  // namespace detail

// Translate-correct heuristic over a whole document of low-resource
// predictions. Span extents, tokens and span counts never change.
inline Document translate_correct(const Document& predictions, const Translator& translator,
                                  const Tagger& src_tagger,
                                  const TranslateCorrectOptions& options = {}) {
  std::string tgt_lang = options.tgt_lang;
  if (tgt_lang.empty() && !predictions.sentences.empty()) {
    tgt_lang = predictions.sentences[0].language;
  }
  std::vector<std::string> marked;
  marked.reserve(predictions.sentences.size());
  for (const auto& s : predictions.sentences) {
    // Nothing to correct without spans, so such sentences are not sent.
    marked.push_back(s.spans.empty() ? std::string()
                                     : insert_markers(s, options.labels, options.style).text);
  }
  const auto translated = detail::translate_all(translator, marked, tgt_lang, options.src_lang,
                                                true, options.batching);
  std::vector<Sentence> projected;
  std::vector<TokenSequence> clean;
  projected.reserve(translated.size());
  for (const auto& t : translated) {
    projected.push_back(parse_markers(t, options.labels, ParseMode::kLenient, options.style));
    clean.push_back(projected.back().tokens);
  }
  const auto tags =
      detail::tag_all(src_tagger, clean, options.src_lang, options.labels, options.batching);

  Document out{{}, predictions.source_name};
  out.sentences.reserve(predictions.sentences.size());
  for (std::size_t i = 0; i < predictions.sentences.size(); ++i) {
    std::vector<EntitySpan> tagged;
    if (!tags[i].empty()) {
      try {
        tagged = tags_to_spans(tags[i], TagMode::kRepair, options.labels);
      } catch (const InputError& e) {
        throw ProtocolError("tagger output for sentence " + std::to_string(i) + ": " + e.what());
      }
    }
    out.sentences.push_back(
        detail::apply_corrections(predictions.sentences[i], projected[i], tagged));
  }
  return out;
}

inline Sentence translate_correct(const Sentence& prediction, const Translator& translator,
                                  const Tagger& src_tagger,
                                  const TranslateCorrectOptions& options = {}) {
  Document doc{{prediction}, {}};
  return translate_correct(doc, translator, src_tagger, options).sentences.front();
}

}  // namespace transfusion

#endif  // TRANSFUSION_FUSION_HPP_
