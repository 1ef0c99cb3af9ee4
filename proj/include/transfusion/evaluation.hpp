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

// Entity-level precision, recall and F1 with exact (label, start, end)
// matching, and cross-language macro averaging.

#ifndef TRANSFUSION_EVALUATION_HPP_
#define TRANSFUSION_EVALUATION_HPP_

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/ner_core.hpp"

namespace transfusion {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LabelScore {
  Metrics metrics;
  std::size_t gold_count = 0;
  std::size_t pred_count = 0;
  std::size_t correct_count = 0;
};

struct ScoreReport {
  std::map<std::string, LabelScore> per_label;
  LabelScore micro;
  std::size_t sentence_count = 0;
};

// Zero denominators give 0, as conlleval does.
inline Metrics compute_metrics(std::size_t gold, std::size_t pred, std::size_t correct) {
  Metrics m;
  m.precision = pred == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred);
  m.recall = gold == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold);
  const double denom = m.precision + m.recall;
  m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
  return m;
}

inline ScoreReport score(const Document& gold, const Document& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw InputError("gold has " + std::to_string(gold.sentences.size()) +
                     " sentences but prediction has " + std::to_string(pred.sentences.size()));
  }
  ScoreReport report;
  report.sentence_count = gold.sentences.size();
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const Sentence& p = pred.sentences[i];
    if (g.tokens.size() != p.tokens.size()) {
      throw InputError("sentence " + std::to_string(i) + ": gold has " +
                       std::to_string(g.tokens.size()) + " tokens but prediction has " +
                       std::to_string(p.tokens.size()));
    }
    std::set<std::tuple<std::string, std::size_t, std::size_t>> gold_spans;
    for (const auto& s : g.spans) {
      gold_spans.emplace(s.label, s.start, s.end);
      ++report.per_label[s.label].gold_count;
    }
    for (const auto& s : p.spans) {
      LabelScore& entry = report.per_label[s.label];
      ++entry.pred_count;
      if (gold_spans.count({s.label, s.start, s.end}) != 0) ++entry.correct_count;
    }
  }
  for (auto& [label, entry] : report.per_label) {
    entry.metrics = compute_metrics(entry.gold_count, entry.pred_count, entry.correct_count);
    report.micro.gold_count += entry.gold_count;
    report.micro.pred_count += entry.pred_count;
    report.micro.correct_count += entry.correct_count;
  }
  report.micro.metrics = compute_metrics(report.micro.gold_count, report.micro.pred_count,
                                         report.micro.correct_count);
  return report;
}

// Predictions given as raw tag sequences are decoded in repair mode.
inline ScoreReport score(const Document& gold, const std::vector<TagSequence>& predicted_tags) {
  Document pred;
  if (predicted_tags.size() != gold.sentences.size()) {
    throw InputError("gold has " + std::to_string(gold.sentences.size()) +
                     " sentences but " + std::to_string(predicted_tags.size()) +
                     " tag sequences were predicted");
  }
  for (std::size_t i = 0; i < predicted_tags.size(); ++i) {
    pred.sentences.push_back({TokenSequence(predicted_tags[i].size(), "_"),
                              tags_to_spans(predicted_tags[i], TagMode::kRepair), {}});
  }
  return score(gold, pred);
}

struct AggregateReport {
  std::vector<std::pair<std::string, double>> per_language_f1;  // sorted by language
  double macro_f1 = 0.0;
};

// Unweighted mean of the per-language micro F1 values.
inline AggregateReport aggregate(const std::map<std::string, ScoreReport>& reports) {
  if (reports.empty()) throw InputError("cannot aggregate zero reports");
  AggregateReport out;
  double sum = 0.0;
  for (const auto& [lang, report] : reports) {
    out.per_language_f1.emplace_back(lang, report.micro.metrics.f1);
    sum += report.micro.metrics.f1;
  }
  out.macro_f1 = sum / static_cast<double>(reports.size());
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::ordered_json to_json(const LabelScore& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.metrics.precision;
  j["recall"] = s.metrics.recall;
  j["f1"] = s.metrics.f1;
  j["gold_count"] = s.gold_count;
  j["pred_count"] = s.pred_count;
  j["correct_count"] = s.correct_count;
  return j;
}

inline nlohmann::ordered_json to_json(const ScoreReport& r) {
  nlohmann::ordered_json j;
  j["per_label"] = nlohmann::ordered_json::object();
  for (const auto& [label, s] : r.per_label) j["per_label"][label] = to_json(s);
  j["micro"] = to_json(r.micro);
  j["sentence_count"] = r.sentence_count;
  return j;
}

inline nlohmann::ordered_json to_json(const AggregateReport& a) {
  nlohmann::ordered_json j;
  j["per_language"] = nlohmann::ordered_json::object();
  for (const auto& [lang, f1] : a.per_language_f1) j["per_language"][lang] = f1;
  j["macro_f1"] = a.macro_f1;
  return j;
}

// Percentage with one decimal, e.g. 0.717 -> "71.7".
inline std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value * 100.0);
  return buf;
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace detail

inline std::string render_table(const ScoreReport& r) {
  std::size_t width = 5;
  for (const auto& [label, s] : r.per_label) width = std::max(width, label.size());
  std::string out = detail::pad("label", width) + "  " + detail::lpad("P", 5) + "  " +
                    detail::lpad("R", 5) + "  " + detail::lpad("F1", 5) + "  " +
                    detail::lpad("gold", 6) + "  " + detail::lpad("pred", 6) + "  " +
                    detail::lpad("correct", 7) + "\n";
  auto row = [&](const std::string& name, const LabelScore& s) {
    out += detail::pad(name, width) + "  " + detail::lpad(format_percent(s.metrics.precision), 5) +
           "  " + detail::lpad(format_percent(s.metrics.recall), 5) + "  " +
           detail::lpad(format_percent(s.metrics.f1), 5) + "  " +
           detail::lpad(std::to_string(s.gold_count), 6) + "  " +
           detail::lpad(std::to_string(s.pred_count), 6) + "  " +
           detail::lpad(std::to_string(s.correct_count), 7) + "\n";
  };
  for (const auto& [label, s] : r.per_label) row(label, s);
  row("micro", r.micro);
  return out;
}

inline std::string render_table(const AggregateReport& a) {
  std::size_t width = 7;
  for (const auto& [lang, f1] : a.per_language_f1) width = std::max(width, lang.size());
  std::string out = detail::pad("lang", width) + "  " + detail::lpad("F1", 5) + "\n";
  for (const auto& [lang, f1] : a.per_language_f1) {
    out += detail::pad(lang, width) + "  " + detail::lpad(format_percent(f1), 5) + "\n";
  }
  out += detail::pad("average", width) + "  " + detail::lpad(format_percent(a.macro_f1), 5) + "\n";
  return out;
}

}  // namespace transfusion

#endif  // TRANSFUSION_EVALUATION_HPP_
