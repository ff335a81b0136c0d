/*
 * Copyright 2026 The spirekit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spirekit/identify.h"

#include <algorithm>
#include <sstream>
#include <string>

#include "spirekit/error.h"

namespace spirekit {

double FlipRate(std::span<const FlipPair> pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no flip pairs");
  }
  const Transform transform = pairs.front().transform;
  const Split split = pairs.front().source_split;
  if (!ApplyTransform(split, transform)) {
    throw Error(ErrorCode::kInvalidTransform,
                std::string(TransformName(transform)) + " cannot apply to " +
                    std::string(SplitName(split)));
  }
  std::size_t flips = 0;
  for (const FlipPair& p : pairs) {
    if (p.transform != transform || p.source_split != split) {
      throw Error(ErrorCode::kHeterogeneousPairs,
                  "pair '" + p.example_id + "' has (" +
                      std::string(TransformName(p.transform)) + ", " +
                      std::string(SplitName(p.source_split)) + "), expected (" +
                      std::string(TransformName(transform)) + ", " +
                      std::string(SplitName(split)) + ")");
    }
    if (p.flipped()) ++flips;
  }
  return static_cast<double>(flips) / static_cast<double>(pairs.size());
}

std::vector<PatternScore> FilterCandidates(std::span<const PatternScore> scores,
                                           std::int64_t min_both,
                                           double min_flip) {
  std::vector<PatternScore> kept;
  for (const PatternScore& s : scores) {
    if (s.n_both_train >= min_both && s.flip_rate >= min_flip) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(),
            [](const PatternScore& a, const PatternScore& b) {
              if (a.flip_rate != b.flip_rate) return a.flip_rate > b.flip_rate;
              return a.pair < b.pair;
            });
  return kept;
}

std::string_view TriageLabelName(TriageLabel label) {
  switch (label) {
    case TriageLabel::kUnreviewed: return "unreviewed";
    case TriageLabel::kSpurious: return "spurious";
    case TriageLabel::kValid: return "valid";
  }
  return "?";
}

void TriageLedger::Set(const PatternKey& pair, TriageLabel label,
                       std::string note) {
  if (label == TriageLabel::kUnreviewed) {
    entries_.erase(pair);
    return;
  }
  entries_[pair] = Entry{label, std::move(note)};
}

TriageLabel TriageLedger::Get(const PatternKey& pair) const {
  const auto it = entries_.find(pair);
  return it == entries_.end() ? TriageLabel::kUnreviewed : it->second.label;
}

TriageLedger TriageLedger::Read(std::istream& in) {
  TriageLedger ledger;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) break;
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    if (fields.size() < 3) {
      throw Error(ErrorCode::kParseError,
                  "ledger line " + std::to_string(line_no) +
                      ": expected <main>\\t<spurious>\\t<label>\\t<note>");
    }
    TriageLabel label;
    if (fields[2] == "spurious") {
      label = TriageLabel::kSpurious;
    } else if (fields[2] == "valid") {
      label = TriageLabel::kValid;
    } else {
      throw Error(ErrorCode::kParseError,
                  "ledger line " + std::to_string(line_no) + ": unknown label '" +
                      fields[2] + "'");
    }
    ledger.Set({fields[0], fields[1]}, label,
               fields.size() > 3 ? fields[3] : std::string());
  }
  return ledger;
}

std::string TriageLedger::FormatLine(const PatternKey& pair, TriageLabel label,
                                     const std::string& note) {
  std::string clean_note = note;
  std::replace(clean_note.begin(), clean_note.end(), '\t', ' ');
  std::replace(clean_note.begin(), clean_note.end(), '\n', ' ');
  return pair.main + "\t" + pair.spurious + "\t" +
         std::string(TriageLabelName(label)) + "\t" + clean_note;
}

void TriageLedger::Write(std::ostream& out) const {
  for (const auto& [pair, entry] : entries_) {
    out << FormatLine(pair, entry.label, entry.note) << "\n";
  }
}

TriageResult TriageApply(std::span<const PatternScore> candidates,
                         const TriageLedger& ledger) {
  std::map<PatternKey, const PatternScore*> by_key;
  for (const PatternScore& c : candidates) by_key[c.pair] = &c;
  for (const auto& [pair, entry] : ledger.entries()) {
    if (!by_key.contains(pair)) {
      throw Error(ErrorCode::kUnknownPair, "ledger labels (" + pair.main + ", " +
                                               pair.spurious +
                                               ") which is not a candidate");
    }
  }
  TriageResult result;
  for (const PatternScore& c : candidates) {
    switch (ledger.Get(c.pair)) {
      case TriageLabel::kSpurious: result.spurious.push_back(c); break;
      case TriageLabel::kUnreviewed: result.unreviewed.push_back(c.pair); break;
      case TriageLabel::kValid: break;
    }
  }
  return result;
}

std::vector<PatternScore> ScorePatterns(
    const std::map<PatternKey, std::vector<FlipPair>>& pairs_by_pattern,
    const std::map<PatternKey, PairStats>& stats) {
  std::vector<PatternScore> scores;
  for (const auto& [key, pairs] : pairs_by_pattern) {
    std::vector<FlipPair> identification;
    for (const FlipPair& p : pairs) {
      if (p.transform == Transform::kRemoveSpurious &&
          p.source_split == Split::kBoth) {
        identification.push_back(p);
      }
    }
    if (identification.empty()) continue;
    PatternScore score;
    score.pair = key;
    score.flip_rate = FlipRate(identification);
    if (const auto it = stats.find(key); it != stats.end()) {
      score.n_both_train = it->second.n_both_train;
      score.bias = it->second.bias;
    } else {
      score.n_both_train = static_cast<std::int64_t>(identification.size());
    }
    scores.push_back(std::move(score));
  }
  return scores;
}

}  // namespace spirekit
