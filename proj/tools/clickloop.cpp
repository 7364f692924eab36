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


// clickloop command line: batch benchmarks, trace scoring and the
// interactive annotation server.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "clickloop/benchmark.hpp"
#include "clickloop/segmenter_spec.hpp"
#include "clickloop/server.hpp"
#include "clickloop/service.hpp"

namespace {

using namespace clickloop;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_targets(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw ConfigError("target '" + t + "' is not a number");
    }
  }
  return out;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("clickloop");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  const char* env = std::getenv("CLICKLOOP_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

struct BenchArgs {
  std::string dataset;
  std::string synth;
  std::string segmenter = "oracle";
  std::string modes = "none,post,pseudo";
  int budget = 20;
  std::string targets = "0.85,0.90";
  std::string ks = "1,2,3,5";
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  int pseudo_per_round = 1;
  int disk_radius = kDefaultDiskRadius;
};

int run_bench(const BenchArgs& a) {
  std::vector<Instance> dataset =
      a.dataset.empty() ? synth_dataset(parse_synth_spec(a.synth)) : load_dataset(a.dataset);
  spdlog::info("{} instances loaded", dataset.size());

  SessionConfig cfg;
  cfg.click_budget = a.budget;
  cfg.target_ious = parse_targets(a.targets);
  cfg.rng_seed = a.seed;
  cfg.pseudo_clicks_per_round = a.pseudo_per_round;
  cfg.disk_radius = a.disk_radius;

  BenchmarkOptions opts;
  opts.modes.clear();
  for (const auto& m : split_list(a.modes)) opts.modes.push_back(parse_refinement_mode(m));
  opts.ks.clear();
  for (const auto& k : split_list(a.ks)) opts.ks.push_back(std::stoi(k));
  opts.jobs = a.jobs;
  opts.segmenter_name = a.segmenter;

  SegmenterSpec spec = parse_segmenter_spec(a.segmenter);
  if (spec.kind == "oracle" && !spec.params.count("flips")) spec.params["flips"] = "1-6";
  const SegmenterFactory factory = [spec](const Instance& inst, std::uint64_t seed) {
    return make_segmenter(spec, inst.gt, seed);
  };

  const EvalReport report = run_benchmark(dataset, factory, cfg, opts);
  if (!a.out.empty()) {
    write_report(a.out, report);
    spdlog::info("report written to {}", a.out);
  }
  std::cout << render_report(report);
  return 0;
}

struct TraceArgs {
  std::string path;
  int budget = 20;
  std::string targets = "0.85,0.90";
  std::string ks = "1,2,3,5";
};

int run_eval_trace(const TraceArgs& a) {
  const auto rounds = read_trace_file(a.path);
  std::vector<double> ious;
  for (const auto& r : rounds) {
    if (!r.iou) throw InputError("trace round " + std::to_string(r.round) + " has no IoU (no ground truth)");
    ious.push_back(*r.iou);
  }
  std::cout << fmt::format("{:>5}  {:>9}  {:>7}  {:>6}\n", "round", "click", "pseudo", "IoU");
  for (const auto& r : rounds) {
    std::cout << fmt::format("{:>5}  {:>9}  {:>7}  {:>6.4f}\n", r.round,
                             fmt::format("{}{},{}", r.human.positive() ? '+' : '-', r.human.pos.row, r.human.pos.col),
                             r.pseudo.size(), *r.iou);
  }
  std::cout << "\n";
  for (double t : parse_targets(a.targets)) {
    const NocResult n = noc(std::span<const double>(ious), t, a.budget);
    std::cout << fmt::format("{}: {}{}\n", target_name(t), n.clicks, n.failed ? " (not reached)" : "");
  }
  for (const auto& k : split_list(a.ks)) {
    std::cout << fmt::format("IoU@{}: {:.4f}\n", k, iou_at_k(ious, std::stoi(k)));
  }
  return 0;
}

struct ServeArgs {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string segmenter = "region-grow";
  std::size_t max_image_px = 16'777'216;
  std::size_t max_body_bytes = 64U << 20U;
  std::string trace_dir;
  bool restore = false;
  int idle_timeout = 1800;
  int workers = 4;
  std::string mode = "none";
};

int run_serve(const ServeArgs& a) {
  ServiceConfig cfg;
  parse_segmenter_spec(a.segmenter);
  cfg.default_segmenter = a.segmenter;
  cfg.max_image_px = a.max_image_px;
  cfg.idle_timeout = std::chrono::seconds(a.idle_timeout);
  cfg.session_defaults.refinement_mode = parse_refinement_mode(a.mode);
  if (!a.trace_dir.empty()) cfg.trace_dir = a.trace_dir;
  Service svc(cfg);
  if (a.restore) spdlog::info("restored {} sessions", svc.restore());

  ServerOptions opts;
  opts.address = a.address;
  opts.port = a.port;
  opts.worker_threads = a.workers;
  opts.max_body_bytes = a.max_body_bytes;
  Server server(svc, opts);
  server.stop_on_signals();
  server.start();
  std::cout << "listening on http://" << a.address << ":" << server.port() << std::endl;
  server.wait();
  server.stop();
  spdlog::info("server stopped");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"clickloop: click-driven segmentation with error-guided pseudo clicks"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "simulate click sessions over a dataset and report NoC / mIoU");
  auto* src = b->add_option_group("source");
  src->add_option("--dataset", bench.dataset, "directory with images/ and masks/");
  src->add_option("--synth", bench.synth, "synthetic suite, e.g. count=50,size=64,seed=1,shapes=ellipse+rect");
  src->require_option(1);
  b->add_option("--segmenter", bench.segmenter,
                "oracle[:flips=1-6,radius=5,fidelity=1,anchor=1] | region-grow[:weight=100,band=2] | "
                "subprocess:<command>")
      ->capture_default_str();
  b->add_option("--mode", bench.modes, "comma list of none, post, pseudo")->capture_default_str();
  b->add_option("--budget", bench.budget, "click budget per instance")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--targets", bench.targets, "IoU targets for NoC")->capture_default_str();
  b->add_option("--ks", bench.ks, "click counts for mIoU@k")->capture_default_str();
  b->add_option("--seed", bench.seed, "run seed")->capture_default_str();
  b->add_option("--out", bench.out, "output directory for report files and traces");
  b->add_option("--jobs", bench.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  b->add_option("--pseudo-per-round", bench.pseudo_per_round, "pseudo clicks per round")->capture_default_str();
  b->add_option("--disk-radius", bench.disk_radius, "click disk radius in pixels")->capture_default_str();

  TraceArgs trace;
  auto* t = app.add_subcommand("eval-trace", "score one trace file");
  t->add_option("trace", trace.path, "trace file (JSON lines)")->required()->check(CLI::ExistingFile);
  t->add_option("--budget", trace.budget, "click budget")->capture_default_str();
  t->add_option("--targets", trace.targets, "IoU targets")->capture_default_str();
  t->add_option("--ks", trace.ks, "click counts for IoU@k")->capture_default_str();

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "run the HTTP + WebSocket annotation server");
  s->add_option("--address", serve.address, "bind address")->capture_default_str();
  s->add_option("--port", serve.port, "TCP port, 0 for any free port")->capture_default_str();
  s->add_option("--segmenter", serve.segmenter, "default segmenter spec")->capture_default_str();
  s->add_option("--max-image-px", serve.max_image_px, "largest accepted image, in pixels")->capture_default_str();
  s->add_option("--max-body-bytes", serve.max_body_bytes, "largest accepted request body")->capture_default_str();
  s->add_option("--trace-dir", serve.trace_dir, "persist session traces here");
  s->add_flag("--restore", serve.restore, "replay sessions found in --trace-dir on startup");
  s->add_option("--idle-timeout", serve.idle_timeout, "seconds before an idle session is dropped")
      ->capture_default_str();
  s->add_option("--workers", serve.workers, "request worker threads")->capture_default_str();
  s->add_option("--mode", serve.mode, "default refinement: none, post or pseudo")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*b) return run_bench(bench);
    if (*t) return run_eval_trace(trace);
    if (*s) return run_serve(serve);
  } catch (const clickloop::ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
