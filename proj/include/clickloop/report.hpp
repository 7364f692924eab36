// Copyright 2026 The clickloop Authors
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

// Evaluation reports and their three renderings: line-delimited JSON records,
// a CSV matrix (one row per refinement mode) and an aligned text table.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "clickloop/errors.hpp"
#include "clickloop/metrics.hpp"
#include "clickloop/session.hpp"

namespace clickloop {

struct InstanceResult {
  std::string id;
  std::vector<NocResult> noc;    // aligned with EvalReport::targets
  std::vector<double> iou_at_k;  // aligned with EvalReport::ks
  int clicks = 0;
  std::optional<std::string> error;
  std::vector<RoundRecord> rounds;  // kept for trace files, not serialised here

  friend bool operator==(const InstanceResult& a, const InstanceResult& b) {
    return a.id == b.id && a.noc == b.noc && a.iou_at_k == b.iou_at_k && a.clicks == b.clicks &&
           a.error == b.error;
  }
};

struct ModeReport {
  RefinementMode mode = RefinementMode::kNone;
  std::string label;
  std::vector<InstanceResult> instances;
  int evaluated = 0;               // instances without error
  std::vector<double> mean_noc;    // per target
  std::vector<int> failures;       // budget-capped instances per target
  std::vector<double> miou;        // per k

  friend bool operator==(const ModeReport&, const ModeReport&) = default;
};

struct EvalReport {
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::string segmenter;
  int budget = 20;
  std::vector<double> targets;
  std::vector<int> ks;
  std::vector<ModeReport> modes;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Row label in the comparison grid.
inline std::string mode_label(RefinementMode m, int pseudo_per_round) {
  switch (m) {
    case RefinementMode::kNone: return "Baseline (BL)";
    case RefinementMode::kPostProcess: return "BL+post-processing";
    case RefinementMode::kPseudoClick:
      return fmt::format("BL+{} pseudo-click{}", pseudo_per_round, pseudo_per_round == 1 ? "" : "s");
  }
  return "?";
}

/// "NoC@85" for 0.85.
inline std::string target_name(double t) { return fmt::format("NoC@{:g}", std::round(t * 1000.0) / 10.0); }

/// Fills the aggregate fields from the per-instance results.
inline void aggregate(ModeReport& m, std::size_t n_targets, const std::vector<int>& ks) {
  m.evaluated = 0;
  m.mean_noc.assign(n_targets, 0.0);
  m.failures.assign(n_targets, 0);
  m.miou.assign(ks.size(), 0.0);
  for (const auto& inst : m.instances) {
    if (inst.error) continue;
    ++m.evaluated;
    for (std::size_t t = 0; t < n_targets; ++t) {
      m.mean_noc[t] += inst.noc[t].clicks;
      m.failures[t] += inst.noc[t].failed ? 1 : 0;
    }
    for (std::size_t k = 0; k < ks.size(); ++k) m.miou[k] += inst.iou_at_k[k];
  }
  if (m.evaluated == 0) return;
  for (double& v : m.mean_noc) v /= m.evaluated;
  for (double& v : m.miou) v /= m.evaluated;
}

// ---- line-delimited JSON -------------------------------------------------

inline std::string report_to_jsonl(const EvalReport& r) {
  using nlohmann::json;
  std::string out;
  json head = {{"type", "run"},       {"fingerprint", r.fingerprint}, {"seed", r.seed},
               {"segmenter", r.segmenter}, {"budget", r.budget},     {"targets", r.targets},
               {"ks", r.ks}};
  out += head.dump() + "\n";
  for (const auto& m : r.modes) {
    for (const auto& inst : m.instances) {
      json noc = json::array();
      json failed = json::array();
      for (const auto& n : inst.noc) {
        noc.push_back(n.clicks);
        failed.push_back(n.failed);
      }
      json rec = {{"type", "instance"},        {"mode", std::string(to_string(m.mode))},
                  {"id", inst.id},             {"noc", noc},
                  {"failed", failed},          {"iou_at_k", inst.iou_at_k},
                  {"clicks", inst.clicks},
                  {"error", inst.error ? json(*inst.error) : json(nullptr)}};
      out += rec.dump() + "\n";
    }
    json agg = {{"type", "aggregate"},   {"mode", std::string(to_string(m.mode))},
                {"label", m.label},      {"instances", m.evaluated},
                {"mean_noc", m.mean_noc}, {"failures", m.failures},
                {"miou", m.miou}};
    out += agg.dump() + "\n";
  }
  return out;
}

inline EvalReport report_from_jsonl(const std::string& text) {
  using nlohmann::json;
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  auto find_mode = [&](RefinementMode mode) -> ModeReport& {
    for (auto& m : r.modes) {
      if (m.mode == mode) return m;
    }
    r.modes.push_back({});
    r.modes.back().mode = mode;
    return r.modes.back();
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type");
    if (type == "run") {
      r.fingerprint = j.at("fingerprint");
      r.seed = j.at("seed");
      r.segmenter = j.at("segmenter");
      r.budget = j.at("budget");
      r.targets = j.at("targets").get<std::vector<double>>();
      r.ks = j.at("ks").get<std::vector<int>>();
    } else if (type == "instance") {
      auto& m = find_mode(parse_refinement_mode(j.at("mode").get<std::string>()));
      InstanceResult inst;
      inst.id = j.at("id");
      const auto noc = j.at("noc").get<std::vector<int>>();
      const auto failed = j.at("failed").get<std::vector<bool>>();
      for (std::size_t i = 0; i < noc.size(); ++i) inst.noc.push_back({noc[i], failed.at(i)});
      inst.iou_at_k = j.at("iou_at_k").get<std::vector<double>>();
      inst.clicks = j.at("clicks");
      if (!j.at("error").is_null()) inst.error = j.at("error").get<std::string>();
      m.instances.push_back(std::move(inst));
    } else if (type == "aggregate") {
      auto& m = find_mode(parse_refinement_mode(j.at("mode").get<std::string>()));
      m.label = j.at("label");
      m.evaluated = j.at("instances");
      m.mean_noc = j.at("mean_noc").get<std::vector<double>>();
      m.failures = j.at("failures").get<std::vector<int>>();
      m.miou = j.at("miou").get<std::vector<double>>();
    } else {
      throw InputError("report: unknown record type '" + type + "'");
    }
  }
  return r;
}

// ---- tables ----------------------------------------------------------------

/// A labelled grid of metric values. Column names follow "mIoU@<k>" (values
/// are ratios, shown as percentages) or "NoC@<t>" (click counts).
struct MetricTable {
  std::vector<std::string> columns;
  struct Row {
    std::string label;
    std::vector<double> values;
  };
  std::vector<Row> rows;
};

inline MetricTable miou_table(const EvalReport& r) {
  MetricTable t;
  for (int k : r.ks) t.columns.push_back(fmt::format("mIoU@{}", k));
  for (const auto& m : r.modes) t.rows.push_back({m.label, m.miou});
  return t;
}

inline MetricTable noc_table(const EvalReport& r) {
  MetricTable t;
  for (double target : r.targets) t.columns.push_back(target_name(target));
  for (const auto& m : r.modes) t.rows.push_back({m.label, m.mean_noc});
  return t;
}

inline std::string table_to_csv(const MetricTable& t) {
  std::string out = "label";
  for (const auto& c : t.columns) out += "," + c;
  out += "\n";
  for (const auto& row : t.rows) {
    out += row.label;
    for (double v : row.values) out += fmt::format(",{:.6f}", v);
    out += "\n";
  }
  return out;
}

inline MetricTable table_from_csv(const std::string& text) {
  MetricTable t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.empty()) continue;
    if (header) {
      t.columns.assign(cells.begin() + 1, cells.end());
      header = false;
      continue;
    }
    if (cells.size() != t.columns.size() + 1) throw InputError("csv row '" + line + "' has the wrong arity");
    MetricTable::Row row{cells[0], {}};
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        row.values.push_back(std::stod(cells[i]));
      } catch (const std::logic_error&) {
        throw InputError("csv cell '" + cells[i] + "' is not a number");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace detail {

inline bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

inline std::string format_metric(const std::string& column, double v) {
  if (starts_with(column, "mIoU@")) return fmt::format("{:.1f}", v * 100.0);
  return fmt::format("{:.2f}", v);
}

}  // namespace detail

/// Aligned text table. When every column shares the mIoU@ or NoC@ prefix the
/// prefix moves into the corner cell ("mIoU@Human-clks", "NoC@IoU") and the
/// column heads keep only the suffix.
inline std::string render_table(const MetricTable& t) {
  std::string corner = "Method";
  std::vector<std::string> heads = t.columns;
  for (const auto& [prefix, title] : {std::pair<std::string, std::string>{"mIoU@", "mIoU@Human-clks"},
                                      std::pair<std::string, std::string>{"NoC@", "NoC@IoU"}}) {
    const bool all = !heads.empty() && std::all_of(heads.begin(), heads.end(), [&](const std::string& h) {
      return detail::starts_with(h, prefix);
    });
    if (all) {
      corner = title;
      for (auto& h : heads) h = h.substr(prefix.size());
      break;
    }
  }

  std::vector<std::vector<std::string>> cells;
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      r.push_back(i < row.values.size() ? detail::format_metric(t.columns[i], row.values[i]) : "-");
    }
    cells.push_back(std::move(r));
  }

  std::size_t label_w = corner.size();
  for (const auto& row : t.rows) label_w = std::max(label_w, row.label.size());
  std::vector<std::size_t> widths(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    widths[i] = heads[i].size();
    for (const auto& r : cells) widths[i] = std::max(widths[i], r[i].size());
  }

  auto line = [&](const std::string& label, const std::vector<std::string>& vals) {
    std::string s = fmt::format("{:<{}}", label, label_w);
    for (std::size_t i = 0; i < vals.size(); ++i) s += fmt::format("  {:>{}}", vals[i], widths[i]);
    return s + "\n";
  };
  std::string out = line(corner, heads);
  for (std::size_t r = 0; r < t.rows.size(); ++r) out += line(t.rows[r].label, cells[r]);
  return out;
}

/// Full human-readable report: NoC table, mIoU table and failure counts.
inline std::string render_report(const EvalReport& r) {
  std::string out = fmt::format("segmenter: {}  seed: {}  budget: {}  fingerprint: {}\n\n",
                                r.segmenter, r.seed, r.budget, r.fingerprint);
  out += render_table(noc_table(r));
  out += "\n";
  out += render_table(miou_table(r));
  out += "\n";
  for (const auto& m : r.modes) {
    out += fmt::format("{}: {} instances", m.label, m.evaluated);
    for (std::size_t i = 0; i < r.targets.size(); ++i) {
      out += fmt::format(", {} failures {}", target_name(r.targets[i]), m.failures.at(i));
    }
    out += "\n";
  }
  return out;
}

/// CSV matrix with NoC and mIoU columns side by side.
inline std::string report_to_csv(const EvalReport& r) {
  MetricTable t;
  for (double target : r.targets) t.columns.push_back(target_name(target));
  for (int k : r.ks) t.columns.push_back(fmt::format("mIoU@{}", k));
  for (const auto& m : r.modes) {
    MetricTable::Row row{m.label, m.mean_noc};
    row.values.insert(row.values.end(), m.miou.begin(), m.miou.end());
    t.rows.push_back(std::move(row));
  }
  return table_to_csv(t);
}

}  // namespace clickloop
