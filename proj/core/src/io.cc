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

#include "spirekit/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spirekit/error.h"
#include "spirekit/rational.h"

namespace spirekit::io {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void Fail(std::string_view source, std::size_t line, const std::string& what) {
  std::string msg(source);
  if (line > 0) msg += ":" + std::to_string(line);
  throw Error(ErrorCode::kParseError, msg + ": " + what);
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double ParseNumber(const std::string& cell, std::string_view source, std::size_t line,
                   std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    Fail(source, line, "column '" + std::string(column) + "' is not a finite number: '" +
                           cell + "'");
  }
  return v;
}

bool ParseBool(const std::string& cell, std::string_view source, std::size_t line,
               std::string_view column) {
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  Fail(source, line, "column '" + std::string(column) + "' must be 0 or 1, got '" + cell + "'");
}

bool JsonBool(const Json& obj, const char* key, std::string_view source, std::size_t line) {
  if (!obj.contains(key)) Fail(source, line, std::string("missing key '") + key + "'");
  const Json& v = obj[key];
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i == 0 || i == 1) return i == 1;
  }
  Fail(source, line, std::string("key '") + key + "' must be 0 or 1");
}

std::string JsonString(const Json& obj, const char* key, std::string_view source,
                       std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    Fail(source, line, std::string("key '") + key + "' must be a string");
  }
  return obj[key].get<std::string>();
}

// Parses each non-blank line as a JSON object.
template <typename Fn>
void ForEachJsonLine(std::istream& in, std::string_view source, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (Trim(line).empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      Fail(source, number, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) Fail(source, number, "expected a JSON object");
    fn(obj, number);
  }
}

Json ParseDocument(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Fail(source, 0, std::string("invalid JSON: ") + e.what());
  }
}

// Column index by header name; throws if a required column is missing.
class CsvHeader {
 public:
  CsvHeader(std::istream& in, std::string_view source) : source_(source) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_;
      if (!Trim(line).empty()) break;
    }
    if (Trim(line).empty()) Fail(source_, 0, "missing CSV header");
    names_ = SplitCsv(line);
    for (std::size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = i;
  }

  std::size_t Require(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) Fail(source_, 1, "missing column '" + name + "'");
    return it->second;
  }
  std::optional<std::size_t> Find(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

  // Next non-blank row, checked for width.
  bool Next(std::istream& in, std::vector<std::string>& cells) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_;
      if (Trim(line).empty()) continue;
      cells = SplitCsv(line);
      if (cells.size() != names_.size()) {
        Fail(source_, line_, "expected " + std::to_string(names_.size()) + " cells, got " +
                                 std::to_string(cells.size()));
      }
      return true;
    }
    return false;
  }
  std::size_t line() const { return line_; }

 private:
  std::string_view source_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::size_t line_ = 0;
};

Json Optional(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json Number(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json CurveJson(const Curve& c) {
  Json points = Json::array();
  for (const CurvePoint& p : c.points) {
    points.push_back({{"x", p.x}, {"y", p.y}, {"threshold", p.threshold}});
  }
  return {{"auc", c.auc}, {"x_min", c.x_min}, {"x_max", c.x_max}, {"points", points}};
}

Json AccuracyJson(const SplitAccuracies& acc) {
  Json out = Json::object();
  for (Split s : kAllSplits) {
    out[std::string(SplitName(s))] = {{"accuracy", acc[s]}, {"n", acc.n[Index(s)]}};
  }
  return out;
}

Json SummaryJson(const sim::Summary& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

}  // namespace

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot write '" + path + "': " + ec.message());
}

std::vector<ExampleRecord> ReadManifest(std::istream& in, std::string_view source) {
  std::vector<ExampleRecord> records;
  ForEachJsonLine(in, source, [&](const Json& obj, std::size_t line) {
    ExampleRecord r;
    r.id = JsonString(obj, "id", source, line);
    r.main = JsonBool(obj, "main", source, line);
    r.spurious = JsonBool(obj, "spurious", source, line);
    const std::string prov =
        obj.contains("provenance") ? JsonString(obj, "provenance", source, line) : "natural";
    if (prov == "natural") {
      r.provenance = Provenance::kNatural;
    } else if (prov == "counterfactual") {
      r.provenance = Provenance::kCounterfactual;
    } else {
      Fail(source, line, "unknown provenance '" + prov + "'");
    }
    const std::string artifact =
        obj.contains("artifact") ? JsonString(obj, "artifact", source, line) : "none";
    const auto kind = ParseArtifact(artifact);
    if (!kind) Fail(source, line, "unknown artifact '" + artifact + "'");
    r.artifact = *kind;
    if (obj.contains("source_id") && !obj["source_id"].is_null()) {
      r.source_id = JsonString(obj, "source_id", source, line);
    }
    if (obj.contains("payload")) {
      const Json& p = obj["payload"];
      if (!p.is_array()) Fail(source, line, "payload must be an array");
      for (const Json& v : p) {
        if (!v.is_number()) Fail(source, line, "payload entries must be numbers");
        r.payload.push_back(v.get<double>());
      }
    }
    try {
      ValidateRecord(r);
    } catch (const Error& e) {
      Fail(source, line, e.what());
    }
    records.push_back(std::move(r));
  });
  return records;
}

void WriteManifest(std::ostream& out, std::span<const ExampleRecord> records) {
  for (const ExampleRecord& r : records) {
    Json obj = {{"id", r.id},
                {"main", r.main ? 1 : 0},
                {"spurious", r.spurious ? 1 : 0},
                {"provenance", r.natural() ? "natural" : "counterfactual"},
                {"artifact", std::string(ArtifactName(r.artifact))}};
    if (r.source_id) obj["source_id"] = *r.source_id;
    if (!r.payload.empty()) obj["payload"] = r.payload;
    out << obj.dump() << '\n';
  }
}

std::vector<FlipPairRow> ReadFlipPairs(std::istream& in, std::string_view source) {
  std::vector<FlipPairRow> rows;
  ForEachJsonLine(in, source, [&](const Json& obj, std::size_t line) {
    FlipPairRow row;
    row.pattern.main = obj.contains("main") && obj["main"].is_string()
                           ? obj["main"].get<std::string>()
                           : "main";
    row.pattern.spurious = obj.contains("spurious") && obj["spurious"].is_string()
                               ? obj["spurious"].get<std::string>()
                               : "spurious";
    row.pair.example_id = JsonString(obj, "id", source, line);
    row.pair.prediction_original = JsonBool(obj, "pred_orig", source, line);
    row.pair.prediction_counterfactual = JsonBool(obj, "pred_cf", source, line);
    const std::string t = JsonString(obj, "transform", source, line);
    const auto transform = ParseTransform(t);
    if (!transform) Fail(source, line, "unknown transform '" + t + "'");
    row.pair.transform = *transform;
    const std::string s = JsonString(obj, "split", source, line);
    const auto split = ParseSplit(s);
    if (!split) Fail(source, line, "unknown split '" + s + "'");
    row.pair.source_split = *split;
    rows.push_back(std::move(row));
  });
  return rows;
}

void WriteFlipPairs(std::ostream& out, std::span<const FlipPairRow> rows) {
  for (const FlipPairRow& r : rows) {
    Json obj = {{"id", r.pair.example_id},
                {"pred_orig", r.pair.prediction_original ? 1 : 0},
                {"pred_cf", r.pair.prediction_counterfactual ? 1 : 0},
                {"transform", std::string(TransformName(r.pair.transform))},
                {"split", std::string(SplitName(r.pair.source_split))},
                {"main", r.pattern.main},
                {"spurious", r.pattern.spurious}};
    out << obj.dump() << '\n';
  }
}

std::string PlanToJson(const AugmentationPlan& plan,
                       const std::optional<ArtifactExposure>& exposure) {
  Json doc = {{"mode", std::string(PlanModeName(plan.mode))},
              {"strategy", plan.strategy},
              {"seed", plan.seed}};
  if (plan.delta) {
    doc["delta"] = {{"value", ToString(plan.delta->delta)},
                    {"branch", std::string(DeltaBranchName(plan.delta->branch))},
                    {"exact", plan.delta->exact},
                    {"residual", plan.delta->residual}};
  }
  Json entries = Json::array();
  for (const PlanEntry& e : plan.entries) {
    entries.push_back({{"source", std::string(SplitName(e.source))},
                       {"target", std::string(SplitName(e.target))},
                       {"transform", std::string(TransformName(e.transform))},
                       {"expected_count", ToString(e.expected_count)}});
  }
  doc["entries"] = entries;
  Json exp = Json::object();
  if (exposure) {
    for (const auto& [kind, entry] : *exposure) {
      exp[std::string(ArtifactName(kind))] = {{"with_main", ToString(entry.with_main)},
                                              {"without_main", ToString(entry.without_main)},
                                              {"p_main", entry.p_main}};
    }
  }
  doc["artifact_exposure"] = exp;
  return doc.dump(2) + "\n";
}

AugmentationPlan PlanFromJson(std::string_view text, std::string_view source) {
  const Json doc = ParseDocument(text, source);
  if (!doc.is_object()) Fail(source, 0, "plan must be a JSON object");
  AugmentationPlan plan;
  if (doc.contains("mode")) {
    const std::string mode = JsonString(doc, "mode", source, 0);
    const auto m = ParsePlanMode(mode);
    if (!m) Fail(source, 0, "unknown plan mode '" + mode + "'");
    plan.mode = *m;
  }
  if (doc.contains("strategy") && doc["strategy"].is_string()) {
    plan.strategy = doc["strategy"].get<std::string>();
  }
  if (doc.contains("seed") && doc["seed"].is_number_unsigned()) {
    plan.seed = doc["seed"].get<std::uint64_t>();
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    Fail(source, 0, "plan needs an 'entries' array");
  }
  for (const Json& e : doc["entries"]) {
    if (!e.is_object()) Fail(source, 0, "plan entries must be objects");
    PlanEntry entry;
    const std::string s = JsonString(e, "source", source, 0);
    const std::string t = JsonString(e, "target", source, 0);
    const std::string tr = JsonString(e, "transform", source, 0);
    const auto src = ParseSplit(s);
    const auto dst = ParseSplit(t);
    const auto transform = ParseTransform(tr);
    if (!src || !dst || !transform) {
      Fail(source, 0, "plan entry has an unknown split or transform");
    }
    entry.source = *src;
    entry.target = *dst;
    entry.transform = *transform;
    if (!e.contains("expected_count")) Fail(source, 0, "plan entry lacks expected_count");
    const Json& c = e["expected_count"];
    try {
      if (c.is_string()) {
        entry.expected_count = ParseRational(c.get<std::string>());
      } else if (c.is_number_integer()) {
        entry.expected_count = Rational(c.get<std::int64_t>());
      } else {
        Fail(source, 0, "expected_count must be a string or integer");
      }
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kParseError) throw;
      Fail(source, 0, err.what());
    }
    plan.entries.push_back(entry);
  }
  return plan;
}

std::vector<PredictionRecord> ReadPredictions(std::istream& in, std::string_view source) {
  CsvHeader header(in, source);
  const std::size_t id = header.Require("id");
  const std::size_t split = header.Require("split");
  const std::size_t label = header.Require("label");
  const std::size_t score = header.Require("score");
  const auto natural = header.Find("natural");
  std::vector<PredictionRecord> preds;
  std::vector<std::string> cells;
  while (header.Next(in, cells)) {
    PredictionRecord p;
    p.id = cells[id];
    const auto s = ParseSplit(cells[split]);
    if (!s) Fail(source, header.line(), "unknown split '" + cells[split] + "'");
    p.split = *s;
    p.label = ParseBool(cells[label], source, header.line(), "label");
    p.score = ParseNumber(cells[score], source, header.line(), "score");
    if (natural) p.natural = ParseBool(cells[*natural], source, header.line(), "natural");
    try {
      ValidatePrediction(p);
    } catch (const Error& e) {
      Fail(source, header.line(), e.what());
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

void WritePredictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  out << "id,split,label,score,natural\n";
  for (const PredictionRecord& p : preds) {
    out << p.id << ',' << SplitName(p.split) << ',' << (p.label ? 1 : 0) << ','
        << FormatDouble(p.score) << ',' << (p.natural ? 1 : 0) << '\n';
  }
}

std::vector<Representation> ReadRepresentations(std::istream& in, std::string_view source) {
  CsvHeader header(in, source);
  const std::size_t id = header.Require("id");
  const std::size_t label = header.Require("spurious_label");
  std::vector<std::size_t> value_cols;
  for (std::size_t k = 0;; ++k) {
    const auto col = header.Find("v" + std::to_string(k));
    if (!col) break;
    value_cols.push_back(*col);
  }
  if (value_cols.empty()) Fail(source, 1, "no value columns v0, v1, ...");
  std::vector<Representation> reps;
  std::vector<std::string> cells;
  while (header.Next(in, cells)) {
    Representation r;
    r.id = cells[id];
    r.spurious_label = ParseBool(cells[label], source, header.line(), "spurious_label");
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      r.values.push_back(ParseNumber(cells[value_cols[k]], source, header.line(),
                                     "v" + std::to_string(k)));
    }
    reps.push_back(std::move(r));
  }
  return reps;
}

void WriteProjections(std::ostream& out, std::span<const Projection> projections) {
  const std::size_t d = projections.empty() ? 0 : projections.front().values.size();
  out << "id,spurious_label,steps";
  for (std::size_t k = 0; k < d; ++k) out << ",v" << k;
  out << '\n';
  for (const Projection& p : projections) {
    out << p.id << ',' << (p.label ? 1 : 0) << ',' << p.steps;
    for (double v : p.values) out << ',' << FormatDouble(v);
    out << '\n';
  }
}

std::string ProbeToJson(const LinearProbe& probe) {
  const Json doc = {{"w", probe.w}, {"b", probe.b}};
  return doc.dump(2) + "\n";
}

LinearProbe ProbeFromJson(std::string_view text, std::string_view source) {
  const Json doc = ParseDocument(text, source);
  if (!doc.is_object() || !doc.contains("w") || !doc["w"].is_array() ||
      !doc.contains("b") || !doc["b"].is_number()) {
    Fail(source, 0, "probe must be {\"w\": [...], \"b\": number}");
  }
  LinearProbe probe;
  for (const Json& v : doc["w"]) {
    if (!v.is_number()) Fail(source, 0, "probe weights must be numbers");
    probe.w.push_back(v.get<double>());
  }
  probe.b = doc["b"].get<double>();
  return probe;
}

std::vector<Segment> ReadSegments(std::istream& in, std::string_view source) {
  CsvHeader header(in, source);
  const std::size_t id = header.Require("id");
  const std::size_t image = header.Require("image_id");
  const std::array<std::size_t, 3> rgb = {header.Require("r"), header.Require("g"),
                                          header.Require("b")};
  const auto ref = header.Find("reference_label");
  constexpr std::array<std::string_view, 3> kChannels = {"r", "g", "b"};
  std::vector<Segment> segments;
  std::vector<std::string> cells;
  while (header.Next(in, cells)) {
    Segment s;
    s.id = cells[id];
    s.image_id = cells[image];
    for (std::size_t c = 0; c < 3; ++c) {
      s.mean_color[c] = ParseNumber(cells[rgb[c]], source, header.line(), kChannels[c]);
    }
    if (ref && !cells[*ref].empty()) {
      s.reference_label = ParseBool(cells[*ref], source, header.line(), "reference_label");
    }
    try {
      ValidateSegment(s);
    } catch (const Error& e) {
      Fail(source, header.line(), e.what());
    }
    segments.push_back(std::move(s));
  }
  return segments;
}

std::string ClusterModelToJson(const ClusterModel& model) {
  Json clusters = Json::array();
  for (int c = 0; c < kNumClusters; ++c) {
    Json members = Json::array();
    for (std::size_t i : model.Members(c)) members.push_back(model.training[i].id);
    const auto& label = model.labels[static_cast<std::size_t>(c)];
    clusters.push_back({{"id", c},
                        {"label", label ? Json(*label ? "sticker" : "not_sticker") : Json(nullptr)},
                        {"members", members}});
  }
  Json training = Json::array();
  for (std::size_t i = 0; i < model.training.size(); ++i) {
    const Segment& s = model.training[i];
    Json seg = {{"id", s.id},
                {"image_id", s.image_id},
                {"rgb", {s.mean_color[0], s.mean_color[1], s.mean_color[2]}},
                {"cluster", model.assignment[i]}};
    if (s.reference_label) seg["reference_label"] = *s.reference_label ? 1 : 0;
    training.push_back(seg);
  }
  Json linkage = Json::array();
  for (const MergeStep& m : model.linkage) {
    linkage.push_back({m.into, m.merged, m.distance, m.size});
  }
  const Json doc = {{"clusters", clusters}, {"training", training}, {"linkage", linkage}};
  return doc.dump(2) + "\n";
}

ClusterModel ClusterModelFromJson(std::string_view text, std::string_view source) {
  const Json doc = ParseDocument(text, source);
  if (!doc.is_object() || !doc.contains("training") || !doc["training"].is_array() ||
      !doc.contains("clusters") || !doc["clusters"].is_array()) {
    Fail(source, 0, "cluster model needs 'training' and 'clusters' arrays");
  }
  ClusterModel model;
  for (const Json& seg : doc["training"]) {
    Segment s;
    s.id = JsonString(seg, "id", source, 0);
    s.image_id = seg.contains("image_id") && seg["image_id"].is_string()
                     ? seg["image_id"].get<std::string>()
                     : "";
    if (!seg.contains("rgb") || !seg["rgb"].is_array() || seg["rgb"].size() != 3) {
      Fail(source, 0, "segment '" + s.id + "' needs an rgb triple");
    }
    for (std::size_t c = 0; c < 3; ++c) s.mean_color[c] = seg["rgb"][c].get<double>();
    if (seg.contains("reference_label")) {
      s.reference_label = JsonBool(seg, "reference_label", source, 0);
    }
    if (!seg.contains("cluster") || !seg["cluster"].is_number_integer()) {
      Fail(source, 0, "segment '" + s.id + "' lacks a cluster id");
    }
    const int c = seg["cluster"].get<int>();
    if (c < 0 || c >= kNumClusters) Fail(source, 0, "cluster id out of range");
    model.assignment.push_back(c);
    model.training.push_back(std::move(s));
  }
  for (const Json& c : doc["clusters"]) {
    if (!c.contains("id") || !c["id"].is_number_integer()) Fail(source, 0, "cluster lacks id");
    const int id = c["id"].get<int>();
    if (id < 0 || id >= kNumClusters) Fail(source, 0, "cluster id out of range");
    if (c.contains("label") && c["label"].is_string()) {
      const std::string label = c["label"].get<std::string>();
      if (label != "sticker" && label != "not_sticker") {
        Fail(source, 0, "cluster label must be 'sticker' or 'not_sticker'");
      }
      model.labels[static_cast<std::size_t>(id)] = label == "sticker";
    }
  }
  if (doc.contains("linkage") && doc["linkage"].is_array()) {
    for (const Json& m : doc["linkage"]) {
      model.linkage.push_back({m.at(0).get<std::size_t>(), m.at(1).get<std::size_t>(),
                               m.at(2).get<double>(), m.at(3).get<std::size_t>()});
    }
  }
  return model;
}

std::string CandidatesToJson(std::span<const PatternScore> candidates) {
  Json out = Json::array();
  for (const PatternScore& s : candidates) {
    out.push_back({{"main", s.pair.main},
                   {"spurious", s.pair.spurious},
                   {"flip_rate", s.flip_rate},
                   {"n_both_train", s.n_both_train},
                   {"bias", Optional(s.bias)}});
  }
  return out.dump(2) + "\n";
}

std::vector<PatternScore> CandidatesFromJson(std::string_view text, std::string_view source) {
  const Json doc = ParseDocument(text, source);
  if (!doc.is_array()) Fail(source, 0, "candidates must be a JSON array");
  std::vector<PatternScore> out;
  for (const Json& c : doc) {
    if (!c.is_object()) Fail(source, 0, "candidate entries must be objects");
    PatternScore s;
    s.pair.main = JsonString(c, "main", source, 0);
    s.pair.spurious = JsonString(c, "spurious", source, 0);
    if (!c.contains("flip_rate") || !c["flip_rate"].is_number()) {
      Fail(source, 0, "candidate lacks a numeric flip_rate");
    }
    s.flip_rate = c["flip_rate"].get<double>();
    if (c.contains("n_both_train") && c["n_both_train"].is_number_integer()) {
      s.n_both_train = c["n_both_train"].get<std::int64_t>();
    }
    if (c.contains("bias") && c["bias"].is_number()) s.bias = c["bias"].get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

std::string CandidatesToTsv(std::span<const PatternScore> candidates) {
  std::string out = "main\tspurious\tflip_rate\tn_both_train\tbias\n";
  for (const PatternScore& s : candidates) {
    out += s.pair.main + "\t" + s.pair.spurious + "\t" + FormatDouble(s.flip_rate) + "\t" +
           std::to_string(s.n_both_train) + "\t" +
           (s.bias ? FormatDouble(*s.bias) : std::string("undefined")) + "\n";
  }
  return out;
}

std::string MatrixToJson(std::span<const CounterfactualCell> cells) {
  Json out = Json::array();
  for (const CounterfactualCell& c : cells) {
    out.push_back({{"source", std::string(SplitName(c.source))},
                   {"transform", std::string(TransformName(c.transform))},
                   {"target", std::string(SplitName(c.target))},
                   {"n", c.n},
                   {"flip_probability", c.flip_probability}});
  }
  return out.dump(2) + "\n";
}

std::string MatrixToTsv(std::span<const CounterfactualCell> cells) {
  std::string out = "source\ttransform\ttarget\tn\tflip_probability\n";
  for (const CounterfactualCell& c : cells) {
    out += std::string(SplitName(c.source)) + "\t" + std::string(TransformName(c.transform)) +
           "\t" + std::string(SplitName(c.target)) + "\t" + std::to_string(c.n) + "\t" +
           FormatDouble(c.flip_probability) + "\n";
  }
  return out;
}

std::string PatternMatricesToJson(std::span<const PatternMatrix> matrices) {
  Json out = Json::array();
  for (const PatternMatrix& m : matrices) {
    out.push_back({{"main", m.pattern.main},
                   {"spurious", m.pattern.spurious},
                   {"cells", Json::parse(MatrixToJson(m.cells))}});
  }
  return out.dump(2) + "\n";
}

std::string PatternMatricesToTsv(std::span<const PatternMatrix> matrices) {
  std::string out = "main\tspurious\tsource\ttransform\ttarget\tn\tflip_probability\n";
  for (const PatternMatrix& m : matrices) {
    for (const CounterfactualCell& c : m.cells) {
      out += m.pattern.main + "\t" + m.pattern.spurious + "\t" +
             std::string(SplitName(c.source)) + "\t" + std::string(TransformName(c.transform)) +
             "\t" + std::string(SplitName(c.target)) + "\t" + std::to_string(c.n) + "\t" +
             FormatDouble(c.flip_probability) + "\n";
    }
  }
  return out;
}

std::string StatsToJson(const SplitCounts& natural, const SplitCounts& all,
                        const DistributionStats& stats) {
  auto counts = [](const SplitCounts& c) {
    Json out = Json::object();
    for (Split s : kAllSplits) out[std::string(SplitName(s))] = ToString(c[s]);
    out["total"] = ToString(c.total());
    return out;
  };
  const Json doc = {{"counts", counts(natural)},
                    {"counts_with_counterfactuals", counts(all)},
                    {"p_main", stats.p_main},
                    {"p_spurious", stats.p_spurious},
                    {"p_spurious_given_main", Optional(stats.p_spurious_given_main)},
                    {"p", Optional(stats.p)},
                    {"bias", Optional(stats.bias)}};
  return doc.dump(2) + "\n";
}

std::string AnnotationQualityToJson(const AnnotationQuality& q) {
  const Json doc = {{"precision", Optional(q.precision)},
                    {"recall", Optional(q.recall)},
                    {"true_positives", q.true_positives},
                    {"false_positives", q.false_positives},
                    {"false_negatives", q.false_negatives},
                    {"scored", q.scored}};
  return doc.dump(2) + "\n";
}

std::string MetricsReportToJson(const MetricsReport& report) {
  Json sweep = Json::array();
  for (const SweepRow& row : report.sweep) {
    Json acc = Json::object();
    for (Split s : kAllSplits) {
      acc[std::string(SplitName(s))] = Number(row.accuracy[Index(s)]);
    }
    sweep.push_back({{"threshold", row.threshold},
                     {"accuracy", acc},
                     {"recall", row.recall},
                     {"precision", Optional(row.precision)},
                     {"recall_gap", Number(row.recall_gap)},
                     {"hallucination_gap", Number(row.hallucination_gap)}});
  }
  const Json doc = {
      {"threshold", report.accuracies.threshold},
      {"p_main", report.p_main},
      {"per_split", AccuracyJson(report.accuracies)},
      {"recall_gap", report.gaps.recall_gap},
      {"hallucination_gap", report.gaps.hallucination_gap},
      {"balanced_accuracy", report.balanced_accuracy},
      {"average_precision", report.average_precision},
      {"average_recall_gap", report.recall_gap_curve.auc},
      {"average_hallucination_gap", report.hallucination_gap_curve.auc},
      {"curves",
       {{"precision_recall", CurveJson(report.precision_recall)},
        {"recall_gap", CurveJson(report.recall_gap_curve)},
        {"hallucination_gap", CurveJson(report.hallucination_gap_curve)}}},
      {"sweep", sweep},
      {"warnings", report.warnings}};
  return doc.dump(2) + "\n";
}

std::string MetricsReportToTsv(const MetricsReport& report) {
  std::string out =
      "threshold\tacc_Both\tacc_JustMain\tacc_JustSpurious\tacc_Neither\trecall\tprecision"
      "\trecall_gap\thallucination_gap\n";
  for (const SweepRow& row : report.sweep) {
    out += FormatDouble(row.threshold);
    for (double a : row.accuracy) out += "\t" + FormatDouble(a);
    out += "\t" + FormatDouble(row.recall);
    out += "\t" + (row.precision ? FormatDouble(*row.precision) : std::string("nan"));
    out += "\t" + FormatDouble(row.recall_gap) + "\t" + FormatDouble(row.hallucination_gap) +
           "\n";
  }
  return out;
}

std::string SweepToJson(const sim::SweepResult& sweep, const sim::SyntheticConfig& config) {
  Json cells = Json::array();
  for (const sim::CellResult& c : sweep.cells) {
    cells.push_back({{"p", c.p},
                     {"trial", c.trial},
                     {"strategy", std::string(sim::StrategyName(c.strategy))},
                     {"train_size", c.train_size},
                     {"per_split", AccuracyJson(c.accuracies)},
                     {"balanced_accuracy", c.balanced_accuracy},
                     {"recall_gap", c.gaps.recall_gap},
                     {"hallucination_gap", c.gaps.hallucination_gap},
                     {"counterfactual_matrix", Json::parse(MatrixToJson(c.counterfactual_matrix))},
                     {"weights", c.weights},
                     {"offset", c.offset}});
  }
  Json aggregate = Json::array();
  for (const sim::AggregateRow& r : sweep.Aggregate(config)) {
    aggregate.push_back({{"p", r.p},
                         {"strategy", std::string(sim::StrategyName(r.strategy))},
                         {"balanced_accuracy", SummaryJson(r.balanced_accuracy)},
                         {"recall_gap", SummaryJson(r.recall_gap)},
                         {"hallucination_gap", SummaryJson(r.hallucination_gap)},
                         {"balanced_accuracy_diff", SummaryJson(r.balanced_accuracy_diff)},
                         {"abs_recall_gap_diff", SummaryJson(r.abs_recall_gap_diff)},
                         {"abs_hallucination_gap_diff", SummaryJson(r.abs_hallucination_gap_diff)},
                         {"grey_box_weight", SummaryJson(r.grey_box_weight)},
                         {"paste_weight", SummaryJson(r.paste_weight)},
                         {"flip_remove_spurious", SummaryJson(r.flip_remove_spurious)}});
  }
  Json strategies = Json::array();
  for (sim::Strategy s : sweep.strategies) strategies.push_back(std::string(sim::StrategyName(s)));
  const Json doc = {{"grid", sweep.grid},
                    {"trials", sweep.trials},
                    {"strategies", strategies},
                    {"cells", cells},
                    {"aggregate", aggregate}};
  return doc.dump(2) + "\n";
}

std::string SweepToTsv(const sim::SweepResult& sweep, const sim::SyntheticConfig& config) {
  std::string out =
      "p\tstrategy\tba_mean\tba_sd\trecall_gap_mean\trecall_gap_sd\thallucination_gap_mean"
      "\thallucination_gap_sd\tba_diff_mean\tba_diff_sd\tabs_recall_gap_diff_mean"
      "\tabs_recall_gap_diff_sd\tgrey_box_weight_mean\tgrey_box_weight_sd"
      "\tpaste_weight_mean\tpaste_weight_sd\tflip_remove_spurious_mean\n";
  for (const sim::AggregateRow& r : sweep.Aggregate(config)) {
    const double values[] = {r.balanced_accuracy.mean,      r.balanced_accuracy.sd,
                             r.recall_gap.mean,             r.recall_gap.sd,
                             r.hallucination_gap.mean,      r.hallucination_gap.sd,
                             r.balanced_accuracy_diff.mean, r.balanced_accuracy_diff.sd,
                             r.abs_recall_gap_diff.mean,    r.abs_recall_gap_diff.sd,
                             r.grey_box_weight.mean,        r.grey_box_weight.sd,
                             r.paste_weight.mean,           r.paste_weight.sd,
                             r.flip_remove_spurious.mean};
    out += FormatDouble(r.p) + "\t" + std::string(sim::StrategyName(r.strategy));
    for (double v : values) out += "\t" + FormatDouble(v);
    out += "\n";
  }
  return out;
}

}  // namespace spirekit::io
