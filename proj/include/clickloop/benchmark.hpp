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

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "clickloop/dataset.hpp"
#include "clickloop/metrics.hpp"
#include "clickloop/random.hpp"
#include "clickloop/report.hpp"
#include "clickloop/session.hpp"
#include "clickloop/trace.hpp"

namespace clickloop {

/// Builds a fresh segmenter for one instance. `seed` is derived from the run
/// seed and the instance id, identical across refinement modes.
using SegmenterFactory =
    std::function<std::unique_ptr<Segmenter>(const Instance& instance, std::uint64_t seed)>;

struct BenchmarkOptions {
  std::vector<RefinementMode> modes{RefinementMode::kNone};
  std::vector<int> ks{1, 2, 3, 5};
  int jobs = 1;
  std::string segmenter_name = "custom";
};

inline std::string config_fingerprint(const SessionConfig& cfg, const BenchmarkOptions& opts) {
  nlohmann::json j = {{"tau", cfg.tau},
                      {"disk_radius", cfg.disk_radius},
                      {"pseudo_clicks_per_round", cfg.pseudo_clicks_per_round},
                      {"click_budget", cfg.click_budget},
                      {"target_ious", cfg.target_ious},
                      {"connectivity", static_cast<int>(cfg.connectivity)},
                      {"min_error_area", cfg.min_error_area},
                      {"rng_seed", cfg.rng_seed},
                      {"ks", opts.ks},
                      {"segmenter", opts.segmenter_name}};
  nlohmann::json modes = nlohmann::json::array();
  for (auto m : opts.modes) modes.push_back(std::string(to_string(m)));
  j["modes"] = modes;
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

/// Evaluates one instance in one mode.
inline InstanceResult evaluate_instance(const Instance& inst, const SegmenterFactory& factory,
                                        const SessionConfig& cfg, const std::vector<int>& ks) {
  InstanceResult res;
  res.id = inst.id;
  try {
    auto seg = factory(inst, split_seed(cfg.rng_seed, inst.id));
    const SessionTrace trace = run_simulated_session(inst.image, inst.gt, *seg, cfg);
    const auto ious = trace.ious();
    for (double t : cfg.target_ious) res.noc.push_back(noc(std::span<const double>(ious), t, cfg.click_budget));
    for (int k : ks) res.iou_at_k.push_back(iou_at_k(ious, k));
    res.clicks = static_cast<int>(trace.rounds.size());
    res.rounds = trace.rounds;
  } catch (const std::exception& e) {
    res.noc.assign(cfg.target_ious.size(), NocResult{cfg.click_budget, true});
    res.iou_at_k.assign(ks.size(), 0.0);
    res.error = e.what();
    spdlog::warn("instance {} failed: {}", inst.id, e.what());
  }
  return res;
}

/// Automatic evaluation of every instance under every requested refinement
/// mode. Work is spread over `opts.jobs` threads; results do not depend on the
/// thread count.
inline EvalReport run_benchmark(const std::vector<Instance>& dataset, const SegmenterFactory& factory,
                                const SessionConfig& cfg, const BenchmarkOptions& opts) {
  cfg.validate();
  if (dataset.empty()) throw InputError("run_benchmark: empty dataset");
  if (opts.modes.empty()) throw ConfigError("run_benchmark: no refinement modes");
  for (int k : opts.ks) {
    if (k < 1) throw ConfigError("run_benchmark: k must be >= 1");
  }

  std::vector<const Instance*> usable;
  for (const auto& inst : dataset) {
    if (!inst.gt.any()) {
      spdlog::warn("instance {} has an empty mask, skipped", inst.id);
      continue;
    }
    usable.push_back(&inst);
  }

  EvalReport report;
  report.fingerprint = config_fingerprint(cfg, opts);
  report.seed = cfg.rng_seed;
  report.segmenter = opts.segmenter_name;
  report.budget = cfg.click_budget;
  report.targets = cfg.target_ious;
  report.ks = opts.ks;

  std::vector<SessionConfig> mode_cfgs;
  for (auto mode : opts.modes) {
    ModeReport m;
    m.mode = mode;
    m.label = mode_label(mode, cfg.pseudo_clicks_per_round);
    m.instances.resize(usable.size());
    report.modes.push_back(std::move(m));
    SessionConfig c = cfg;
    c.refinement_mode = mode;
    mode_cfgs.push_back(c);
  }

  const std::size_t total = usable.size() * opts.modes.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t mi = job / usable.size();
      const std::size_t ii = job % usable.size();
      report.modes[mi].instances[ii] = evaluate_instance(*usable[ii], factory, mode_cfgs[mi], opts.ks);
    }
  };
  const int threads = std::max(1, std::min<int>(opts.jobs, static_cast<int>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& m : report.modes) aggregate(m, cfg.target_ious.size(), opts.ks);
  return report;
}

/// Writes report.jsonl, matrix.csv, report.txt and traces/<mode>/<id>.jsonl.
inline void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write_text = [](const fs::path& p, const std::string& s) {
    write_file_bytes(p, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  write_text(dir / "report.jsonl", report_to_jsonl(report));
  write_text(dir / "matrix.csv", report_to_csv(report));
  write_text(dir / "report.txt", render_report(report));
  for (const auto& m : report.modes) {
    const fs::path tdir = dir / "traces" / std::string(to_string(m.mode));
    fs::create_directories(tdir);
    for (const auto& inst : m.instances) {
      if (!inst.error) write_trace_file((tdir / (inst.id + ".jsonl")).string(), inst.rounds);
    }
  }
}

}  // namespace clickloop
