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


// Acceptance gate. Each check prints one PASS/FAIL line; the exit status is
// nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "clickloop/benchmark.hpp"
#include "clickloop/losses.hpp"
#include "clickloop/oracle_segmenter.hpp"
#include "clickloop/region_grow_segmenter.hpp"
#include "oracles.hpp"

namespace {

using namespace clickloop;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome error_map_exactness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  std::size_t diffs = 0;
  for (int i = 0; i < 1000; ++i) {
    const Shape s{64, 64};
    const auto p = oracle::random_prob(s, rng);
    const auto m = oracle::random_mask(s, uniform_real(rng, 0.0, 1.0), rng);
    const auto e = ground_truth_error_maps(p, m, 0.5);
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const bool pred = p(r, c) >= 0.5;
        diffs += (e.m_fp.test(r, c) != (!m.test(r, c) && pred)) ? 1 : 0;
        diffs += (e.m_fn.test(r, c) != (m.test(r, c) && !pred)) ? 1 : 0;
      }
    }
  }
  const double secs = seconds_since(t0);
  o.detail = fmt::format("1000 pairs at 64x64, {} pixel diffs, {:.2f} s", diffs, secs);
  if (diffs != 0) o.fail(fmt::format("{} pixel diffs", diffs));
  if (secs >= 10.0) o.fail(fmt::format("took {:.2f} s", secs));
  return o;
}

/// Error-map pair made of small rectangles above 0.5 on a sub-0.5 background.
/// Few distinct rectangle sizes make equal-area ties common.
ErrorMapPair blocky_error_maps(Rng& rng) {
  const Shape s{uniform_int(rng, 8, 40), uniform_int(rng, 8, 40)};
  auto make = [&]() {
    ProbabilityMap m = oracle::random_prob(s, rng, 0.0, 0.49);
    const int n = uniform_int(rng, 0, 5);
    for (int k = 0; k < n; ++k) {
      const int h = uniform_int(rng, 1, 4);
      const int w = uniform_int(rng, 1, 4);
      const int r0 = uniform_int(rng, 0, s.height - h);
      const int c0 = uniform_int(rng, 0, s.width - w);
      for (int r = r0; r < r0 + h; ++r) {
        for (int c = c0; c < c0 + w; ++c) m(r, c) = uniform_real(rng, 0.5, 1.0);
      }
    }
    return m;
  };
  ErrorMapPair e{make(), make()};
  // Resolve overlap in favour of the larger estimate, as a decoder would.
  for (std::size_t i = 0; i < e.fp.size(); ++i) {
    auto& a = e.fp.values()[i];
    auto& b = e.fn.values()[i];
    if (a >= 0.5 && b >= 0.5) (a >= b ? b : a) = 0.1;
  }
  return e;
}

Outcome pseudo_click_correctness() {
  Outcome o;
  Rng rng(202);
  int matches = 0;
  int clicks = 0;
  for (int i = 0; i < 200; ++i) {
    const ErrorMapPair errs = blocky_error_maps(rng);
    const BinaryMask fp = threshold(errs.fp, 0.5);
    const BinaryMask fn = threshold(errs.fn, 0.5);
    const auto got = generate_pseudo_click(errs);
    const auto region = select_error_region(fp, fn, Connectivity::kEight);
    const auto want = oracle::brute_click(fp, fn, true);
    bool ok = got.has_value() == want.has_value() && region.has_value() == want.has_value();
    if (ok && want) {
      ++clicks;
      ok = got->pos == want->pos && (got->polarity == Polarity::kNegative) == want->negative &&
           region->from_fp == want->negative && region->region.pixels == want->region.pixels &&
           got->source == ClickSource::kPseudo;
    }
    matches += ok ? 1 : 0;
  }
  o.detail = fmt::format("{}/200 match ({} with a click, {} without)", matches, clicks, 200 - clicks);
  if (matches != 200) o.fail(o.detail);
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(303);
  double worst = 0.0;
  std::string worst_name = "none";
  auto record = [&](const std::string& name, std::span<const double> analytic, const std::vector<double>& fd) {
    const double e = oracle::max_relative_error(analytic, fd);
    if (e > worst) {
      worst = e;
      worst_name = name;
    }
  };
  for (int i = 0; i < 50; ++i) {
    const Shape s{8, 8};
    const auto p = oracle::random_prob(s, rng, 0.05, 0.95);
    const auto t = oracle::random_mask(s, 0.5, rng);
    const ErrorMapPair errs{oracle::random_prob(s, rng, 0.05, 0.95), oracle::random_prob(s, rng, 0.05, 0.95)};
    const auto gt = ground_truth_error_maps(p, t, 0.5);
    auto fd = [&](const ProbabilityMap& at, auto&& f) { return oracle::central_difference(at, f, 1e-5); };

    for (auto norm : {NflNormalization::kProbabilitySum, NflNormalization::kFocalSum}) {
      auto f = [&](const ProbabilityMap& q) { return nfl(q, t, 2.0, 1e-7, norm).value; };
      record(norm == NflNormalization::kFocalSum ? "nfl/focal-sum" : "nfl/prob-sum",
             nfl(p, t, 2.0, 1e-7, norm).grad.values(), fd(p, f));
    }
    record("bce", bce(p, t).grad.values(), fd(p, [&](const ProbabilityMap& q) { return bce(q, t).value; }));
    record("fl", fl(p, t).grad.values(), fd(p, [&](const ProbabilityMap& q) { return fl(q, t).value; }));
    record("soft-iou", soft_iou(p, t).grad.values(),
           fd(p, [&](const ProbabilityMap& q) { return soft_iou(q, t).value; }));

    const LossWeights w;
    const auto res = combined_loss(p, errs, t, gt, w);
    record("combined/prob", res.grad_prob.values(),
           fd(p, [&](const ProbabilityMap& q) { return combined_loss(q, errs, t, gt, w).value; }));
    record("combined/fp", res.grad_fp.values(), fd(errs.fp, [&](const ProbabilityMap& q) {
             return combined_loss(p, ErrorMapPair{q, errs.fn}, t, gt, w).value;
           }));
    record("combined/fn", res.grad_fn.values(), fd(errs.fn, [&](const ProbabilityMap& q) {
             return combined_loss(p, ErrorMapPair{errs.fp, q}, t, gt, w).value;
           }));
  }
  const double secs = seconds_since(t0);
  o.detail = fmt::format("worst relative error {:.2e} ({}), {:.2f} s", worst, worst_name, secs);
  if (worst > 1e-4) o.fail(o.detail);
  if (secs >= 30.0) o.fail(fmt::format("took {:.2f} s", secs));
  return o;
}

Outcome nfl_spot_value() {
  Outcome o;
  BinaryMask t(1, 1);
  t.set({0, 0});
  const double got = nfl(ProbabilityMap(Shape{1, 1}, 0.5), t).value;
  const double want = 0.25 * 2.0 * std::log(2.0);
  o.detail = fmt::format("{:.12f} vs {:.12f}", got, want);
  if (std::abs(got - want) > 1e-9) o.fail(o.detail);
  return o;
}

// The seeded oracle suite shared by the loop checks: synthetic objects, one
// to six flipped blobs per instance, first blob where the first click lands.
struct OracleSuite {
  std::vector<Instance> instances;
  std::vector<int> blobs;

  OracleNoiseConfig noise(std::size_t i, double fidelity) const {
    OracleNoiseConfig cfg;
    cfg.flip_blob_count = blobs[i];
    cfg.blob_radius = 3;
    cfg.error_estimate_fidelity = fidelity;
    cfg.rng_seed = 1000 + i;
    cfg.anchor_first_blob = true;
    return cfg;
  }
};

OracleSuite oracle_suite() {
  OracleSuite s;
  s.instances = synth_dataset(parse_synth_spec("count=100,size=64,seed=2026,shapes=ellipse+rect+ring"));
  for (std::size_t i = 0; i < s.instances.size(); ++i) s.blobs.push_back(1 + static_cast<int>(i % 6));
  return s;
}

// Every trace produced by the suites, for the NoC monotonicity check.
std::vector<std::vector<double>> g_all_traces;

Outcome oracle_loop(const OracleSuite& suite) {
  Outcome o;
  SessionConfig base;
  base.target_ious = {0.85, 0.90, 1.0};
  const auto dir_a = fs::temp_directory_path() / fmt::format("clickloop_accept_a_{}", ::getpid());
  const auto dir_b = fs::temp_directory_path() / fmt::format("clickloop_accept_b_{}", ::getpid());
  int monotone = 0, none_exact = 0, pseudo_exact = 0, identical = 0;
  const int n = static_cast<int>(suite.instances.size());

  for (int run = 0; run < 2; ++run) {
    const fs::path dir = run == 0 ? dir_a : dir_b;
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (int i = 0; i < n; ++i) {
      const Instance& inst = suite.instances[i];
      const int k = suite.blobs[i];
      for (auto mode : {RefinementMode::kNone, RefinementMode::kPseudoClick}) {
        SessionConfig cfg = base;
        cfg.refinement_mode = mode;
        OracleSegmenter seg(inst.gt, suite.noise(i, 1.0));
        const SessionTrace trace = run_simulated_session(inst.image, inst.gt, seg, cfg);
        write_trace_file((dir / fmt::format("{}_{}.jsonl", inst.id, to_string(mode))).string(), trace.rounds);
        if (run == 1) continue;
        const auto ious = trace.ious();
        g_all_traces.push_back(ious);
        monotone += std::is_sorted(ious.begin(), ious.end()) ? 1 : 0;
        const int clicks = noc(trace, 1.0, cfg.click_budget).clicks;
        const int want = mode == RefinementMode::kNone ? k : (k + 1) / 2;
        if (clicks == want) {
          (mode == RefinementMode::kNone ? none_exact : pseudo_exact) += 1;
        } else if (o.pass) {
          o.fail(fmt::format("{} k={} mode={} NoC {} != {}", inst.id, k, to_string(mode), clicks, want));
        }
      }
    }
  }
  for (const auto& e : fs::directory_iterator(dir_a)) {
    const auto other = dir_b / e.path().filename();
    identical += fs::exists(other) && slurp(e.path()) == slurp(other) ? 1 : 0;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const std::string summary =
      fmt::format("{} instances: monotone {}/{}, none NoC=k {}/{}, pseudo NoC=ceil(k/2) {}/{}, identical files {}/{}",
                  n, monotone, 2 * n, none_exact, n, pseudo_exact, n, identical, 2 * n);
  if (monotone != 2 * n) o.fail(summary);
  if (none_exact != n || pseudo_exact != n) o.fail(summary);
  if (identical != 2 * n) o.fail(summary);
  if (o.pass) o.detail = summary;
  else o.detail += "; " + summary;
  return o;
}

Outcome pseudo_click_benefit(const OracleSuite& suite) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < suite.instances.size(); ++i) index[suite.instances[i].id] = i;
  const SegmenterFactory factory = [&](const Instance& inst, std::uint64_t) -> std::unique_ptr<Segmenter> {
    return std::make_unique<OracleSegmenter>(inst.gt, suite.noise(index.at(inst.id), 0.9));
  };
  SessionConfig cfg;
  BenchmarkOptions opts;
  opts.modes = {RefinementMode::kNone, RefinementMode::kPostProcess, RefinementMode::kPseudoClick};
  opts.ks = {2};
  const EvalReport rep = run_benchmark(suite.instances, factory, cfg, opts);
  for (const auto& m : rep.modes) {
    for (const auto& inst : m.instances) {
      std::vector<double> ious;
      for (const auto& r : inst.rounds) ious.push_back(r.iou.value_or(0.0));
      g_all_traces.push_back(ious);
    }
  }
  const auto& none = rep.modes[0];
  const auto& post = rep.modes[1];
  const auto& pseudo = rep.modes[2];
  const double secs = seconds_since(t0);
  o.detail = fmt::format(
      "{} instances at fidelity 0.9: NoC@90 none {:.2f} / post {:.2f} / pseudo {:.2f}; "
      "mIoU@2 none {:.4f} / post {:.4f} / pseudo {:.4f}; {:.2f} s",
      none.evaluated, none.mean_noc[1], post.mean_noc[1], pseudo.mean_noc[1], none.miou[0], post.miou[0],
      pseudo.miou[0], secs);
  if (none.evaluated < 50) o.fail(o.detail);
  if (!(pseudo.mean_noc[1] <= none.mean_noc[1])) o.fail(o.detail);
  if (!(pseudo.miou[0] >= post.miou[0] && post.miou[0] >= none.miou[0])) o.fail(o.detail);
  if (secs >= 120.0) o.fail(o.detail);
  return o;
}

Outcome refinement_identity() {
  Outcome o;
  Rng rng(707);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const Shape s{uniform_int(rng, 4, 64), uniform_int(rng, 4, 64)};
    const auto p = oracle::random_prob(s, rng);
    const auto m = oracle::random_mask(s, uniform_real(rng, 0.0, 1.0), rng);
    const auto e = ground_truth_error_maps(p, m, 0.5);
    const ErrorMapPair errs{ProbabilityMap::from_mask(e.m_fp), ProbabilityMap::from_mask(e.m_fn)};
    exact += threshold(subtract_error_maps(p, errs), 0.5) == m ? 1 : 0;
  }
  o.detail = fmt::format("{}/100 instances reproduce the truth", exact);
  if (exact != 100) o.fail(o.detail);
  return o;
}

Outcome region_grow_voronoi() {
  Outcome o;
  Rng rng(808);
  int partition_ok = 0;
  int mask_ok = 0;
  RegionGrowConfig cfg;
  cfg.intensity_weight = 0.0;
  RegionGrowSegmenter seg(cfg);
  for (int t = 0; t < 50; ++t) {
    const Shape s{32, 32};
    Image img(s);
    const float level = static_cast<float>(uniform_real(rng, 0.0, 1.0));
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) img.set_gray(r, c, level);
    }
    std::set<PixelCoord> used;
    std::vector<Click> clicks;
    const int n = uniform_int(rng, 2, 10);
    while (static_cast<int>(clicks.size()) < n) {
      const PixelCoord p{uniform_int(rng, 0, 31), uniform_int(rng, 0, 31)};
      if (!used.insert(p).second) continue;
      Click c;
      c.pos = p;
      c.polarity = clicks.empty() || uniform_int(rng, 0, 1) ? Polarity::kPositive : Polarity::kNegative;
      c.index = 1;
      clicks.push_back(c);
    }
    std::vector<PixelCoord> seeds;
    for (const auto& c : clicks) seeds.push_back(c.pos);
    const Grid<int> want = oracle::brute_voronoi(s, seeds);
    partition_ok += geodesic_partition(img, seeds, 0.0).seed.data() == want.data() ? 1 : 0;

    const SegmentationInput in{img,
                               ProbabilityMap(s, 0.0),
                               encode_clicks(clicks, s, kDefaultDiskRadius, ClickSource::kHuman),
                               encode_clicks({}, s, kDefaultDiskRadius, ClickSource::kPseudo),
                               clicks,
                               {}};
    const BinaryMask got = threshold(seg.predict(in).prob, 0.5);
    bool same = true;
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) same = same && got.test(r, c) == clicks[want(r, c)].positive();
    }
    mask_ok += same ? 1 : 0;
  }
  o.detail = fmt::format("labels match on {}/50 click sets, thresholded masks match on {}/50", partition_ok, mask_ok);
  if (partition_ok != 50 || mask_ok != 50) o.fail(o.detail);
  return o;
}

Outcome metric_definitions() {
  Outcome o;
  const std::vector<double> seq{0.60, 0.82, 0.87, 0.91};
  if (noc(seq, 0.85, 20).clicks != 3 || noc(seq, 0.90, 20).clicks != 4) o.fail("NoC on [0.60, 0.82, 0.87, 0.91]");
  if (noc(std::vector<double>{0.95}, 0.90, 20).clicks != 1) o.fail("NoC on [0.95]");
  const auto capped = noc(std::vector<double>(20, 0.8), 0.90, 20);
  if (capped.clicks != 20 || !capped.failed) o.fail("NoC budget cap");
  using Traces = std::vector<std::vector<double>>;
  if (miou_at_k(Traces{{1.0}, {1.0}, {1.0}}, 3) != 1.0) o.fail("mIoU carry-forward");
  if (miou_at_k(Traces{{0.5, 0.7, 0.8}}, 2) != 0.7) o.fail("mIoU@2 on [0.5, 0.7, 0.8]");
  if (miou_at_k(Traces{{0.5, 0.7, 0.8}, {0.9, 0.95}}, 2) != (0.7 + 0.95) / 2.0) o.fail("mIoU mean of two traces");
  try {
    miou_at_k(Traces{}, 2);
    o.fail("mIoU of no traces did not throw");
  } catch (const InputError&) {
  }

  const fs::path fixtures(CLICKLOOP_FIXTURE_DIR);
  const MetricTable table = table_from_csv(slurp(fixtures / "comparison_table.csv"));
  const std::string rendered = render_table(table);
  if (rendered != slurp(fixtures / "comparison_table.txt")) o.fail("comparison table differs from the golden text");
  if (rendered.find("Baseline (BL)       23.2  51.2  77.3") == std::string::npos ||
      rendered.find("BL+1 pseudo-click   44.8  64.0  80.1") == std::string::npos) {
    o.fail("reference rows missing from the rendered table");
  }
  if (o.pass) o.detail = "NoC and mIoU fixtures hold; comparison table renders byte-identically";
  return o;
}

Outcome noc_monotone_in_target() {
  Outcome o;
  std::size_t violations = 0;
  for (const auto& ious : g_all_traces) {
    for (double lo = 0.50; lo <= 1.0; lo += 0.05) {
      violations += noc(ious, lo, 20).clicks > noc(ious, std::min(1.0, lo + 0.05), 20).clicks ? 1 : 0;
    }
    violations += noc(ious, 0.85, 20).clicks > noc(ious, 0.90, 20).clicks ? 1 : 0;
  }
  o.detail = fmt::format("{} traces, {} violations", g_all_traces.size(), violations);
  if (g_all_traces.empty() || violations != 0) o.fail(o.detail);
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const OracleSuite suite = oracle_suite();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"error maps match per-pixel brute force", error_map_exactness},
      {"pseudo clicks match brute-force search", pseudo_click_correctness},
      {"loss gradients match finite differences", gradient_checks},
      {"normalized focal loss single-pixel value", nfl_spot_value},
      {"oracle loop monotone, exact and reproducible", [&] { return oracle_loop(suite); }},
      {"pseudo clicks cut NoC; mIoU@2 ordered pseudo, post, baseline", [&] { return pseudo_click_benefit(suite); }},
      {"exact error maps refine to the truth", refinement_identity},
      {"zero-weight region grow is a Voronoi partition", region_grow_voronoi},
      {"metric definitions and comparison table", metric_definitions},
      {"NoC never decreases with a higher target", noc_monotone_in_target},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")" << std::endl;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " acceptance checks passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
