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


// Transport-independent interactive session service. Every entry point takes
// and returns serialized payloads so the HTTP/WebSocket layer stays thin.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/beast/core/detail/base64.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "clickloop/image_io.hpp"
#include "clickloop/rle.hpp"
#include "clickloop/segmenter_spec.hpp"
#include "clickloop/session.hpp"
#include "clickloop/trace.hpp"

namespace clickloop {

using SegmenterMaker =
    std::function<std::unique_ptr<Segmenter>(const Image& image, const std::optional<BinaryMask>& gt)>;

struct ServiceConfig {
  std::string default_segmenter = "region-grow";
  std::size_t max_image_px = 16'777'216;
  std::chrono::seconds idle_timeout{1800};
  std::optional<std::filesystem::path> trace_dir;
  SessionConfig session_defaults;
  // Extra segmenters selectable by name, in addition to region-grow and oracle.
  std::map<std::string, SegmenterMaker> custom_segmenters;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Receives serialized event messages for one session. Must not block.
using EventSink = std::function<void(const std::string& message)>;

namespace detail {

class ApiError : public Error {
 public:
  ApiError(int status, const std::string& msg) : Error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(boost::beast::detail::base64::encoded_size(bytes.size()), '\0');
  out.resize(boost::beast::detail::base64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

/// Accepts plain base64 or a data: URL.
inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.rfind("data:", 0) == 0) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw InputError("malformed data URL");
    text.remove_prefix(comma + 1);
  }
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  std::vector<std::uint8_t> out(boost::beast::detail::base64::decoded_size(text.size()));
  const auto [written, read] = boost::beast::detail::base64::decode(out.data(), text.data(), text.size());
  std::size_t significant = text.size();
  while (significant > 0 && text[significant - 1] == '=') --significant;
  if (read < significant) throw InputError("invalid base64 payload");
  out.resize(written);
  return out;
}

inline std::string json_body(const nlohmann::json& j) { return j.dump(); }

inline ApiResponse error_response(int status, const std::string& msg) {
  return {status, "application/json", nlohmann::json{{"error", msg}}.dump()};
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

}  // namespace detail

inline nlohmann::json session_config_to_json(const SessionConfig& c) {
  return {{"tau", c.tau},
          {"disk_radius", c.disk_radius},
          {"pseudo_clicks_per_round", c.pseudo_clicks_per_round},
          {"refinement_mode", std::string(to_string(c.refinement_mode))},
          {"connectivity", c.connectivity == Connectivity::kFour ? 4 : 8},
          {"min_error_area", c.min_error_area},
          {"rng_seed", c.rng_seed}};
}

/// Applies the keys present in `j` on top of `base`.
inline SessionConfig session_config_from_json(const nlohmann::json& j, SessionConfig base) {
  if (!j.is_object()) throw InputError("config must be an object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "tau") base.tau = v.get<double>();
      else if (k == "disk_radius") base.disk_radius = v.get<int>();
      else if (k == "pseudo_clicks_per_round") base.pseudo_clicks_per_round = v.get<int>();
      else if (k == "refinement_mode") base.refinement_mode = parse_refinement_mode(v.get<std::string>());
      else if (k == "connectivity") {
        const int n = v.get<int>();
        if (n != 4 && n != 8) throw ConfigError("connectivity must be 4 or 8");
        base.connectivity = n == 4 ? Connectivity::kFour : Connectivity::kEight;
      } else if (k == "min_error_area") base.min_error_area = v.get<std::size_t>();
      else if (k == "rng_seed") base.rng_seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  base.validate();
  return base;
}

class Service {
 public:
  explicit Service(ServiceConfig cfg = {}) : cfg_(std::move(cfg)) {
    cfg_.session_defaults.validate();
    if (cfg_.trace_dir) std::filesystem::create_directories(*cfg_.trace_dir);
  }

  const ServiceConfig& config() const { return cfg_; }

  /// Routes one request. `target` may carry a query string, which is ignored.
  ApiResponse handle(std::string_view method, std::string_view target, const std::string& body) {
    const auto parts = split_path(target);
    try {
      if (parts.size() == 1 && parts[0] == "health") {
        if (method != "GET") return method_not_allowed();
        return {200, "application/json", nlohmann::json{{"status", "ok"}, {"sessions", session_count()}}.dump()};
      }
      if (parts.empty() || parts[0] != "sessions" || parts.size() > 3) return not_found();
      if (parts.size() == 1) return method == "POST" ? create_session(body) : method_not_allowed();
      const std::string& id = parts[1];
      if (parts.size() == 2) return method == "GET" ? get_state(id) : method_not_allowed();
      if (parts[2] == "clicks") return method == "POST" ? post_click(id, body) : method_not_allowed();
      if (parts[2] == "undo") return method == "POST" ? undo(id) : method_not_allowed();
      if (parts[2] == "mask.png") return method == "GET" ? get_mask_png(id) : method_not_allowed();
      return not_found();
    } catch (const std::exception& e) {
      return detail::error_response(500, e.what());
    }
  }

  ApiResponse create_session(const std::string& body) {
    return guarded([&] {
      const auto j = parse_body(body);
      if (!j.contains("image") || !j["image"].is_string()) throw InputError("field 'image' (base64) is required");
      Image image = decode_upload_image(j["image"].get<std::string>());
      std::optional<BinaryMask> gt;
      if (j.contains("gt") && !j["gt"].is_null()) {
        if (!j["gt"].is_string()) throw InputError("field 'gt' must be base64");
        gt = decode_upload_mask(j["gt"].get<std::string>());
        if (gt->shape() != image.shape) {
          throw ShapeError("gt " + to_string(gt->shape()) + " does not match image " + to_string(image.shape));
        }
      }
      SessionConfig scfg = cfg_.session_defaults;
      if (j.contains("config")) scfg = session_config_from_json(j["config"], scfg);
      std::string seg_name = cfg_.default_segmenter;
      if (j.contains("segmenter")) {
        if (!j["segmenter"].is_string()) throw InputError("field 'segmenter' must be a string");
        seg_name = j["segmenter"].get<std::string>();
      }
      std::vector<Click> replay;
      if (j.contains("clicks")) replay = parse_click_list(j["clicks"]);

      auto entry = std::make_shared<Entry>();
      entry->id = new_id();
      entry->created_at = detail::utc_timestamp();
      entry->cfg = scfg;
      entry->segmenter = seg_name;
      entry->image = std::move(image);
      entry->gt = std::move(gt);
      reset(*entry);
      for (const Click& c : replay) apply(*entry, c);
      persist_meta(*entry);
      persist_trace(*entry);
      {
        std::lock_guard lock(store_mu_);
        store_[entry->id] = entry;
      }
      spdlog::info("session {} created ({}x{}, segmenter {})", entry->id, entry->image.shape.height,
                   entry->image.shape.width, entry->segmenter);
      nlohmann::json out = {{"id", entry->id},
                            {"created_at", entry->created_at},
                            {"segmenter", entry->segmenter},
                            {"height", entry->image.shape.height},
                            {"width", entry->image.shape.width},
                            {"config", session_config_to_json(entry->cfg)}};
      return ApiResponse{201, "application/json", out.dump()};
    });
  }

  ApiResponse post_click(const std::string& id, const std::string& body) {
    return guarded([&] {
      auto entry = find(id);
      const auto j = parse_body(body);
      Click click = parse_click(j, 0);
      const bool include_prob = j.value("include_prob", false);
      std::unique_lock busy(entry->busy, std::try_to_lock);
      if (!busy.owns_lock()) throw detail::ApiError(409, "session " + id + " is processing another request");
      touch(*entry);
      if (!entry->image.shape.contains(click.pos)) {
        throw detail::ApiError(422, "click (" + std::to_string(click.pos.row) + ", " +
                                        std::to_string(click.pos.col) + ") is outside the image " +
                                        to_string(entry->image.shape));
      }
      const RoundResult r = apply_or_restore(*entry, click);
      persist_trace(*entry);
      nlohmann::json payload = round_payload(*entry, r, include_prob);
      publish(*entry, "round", payload);
      return ApiResponse{200, "application/json", payload.dump()};
    });
  }

  ApiResponse undo(const std::string& id) {
    return guarded([&] {
      auto entry = find(id);
      std::unique_lock busy(entry->busy, std::try_to_lock);
      if (!busy.owns_lock()) throw detail::ApiError(409, "session " + id + " is processing another request");
      touch(*entry);
      if (entry->state.human_clicks.empty()) throw detail::ApiError(409, "nothing to undo");
      std::vector<Click> keep = entry->state.human_clicks;
      const Click removed = keep.back();
      keep.pop_back();
      rebuild(*entry, keep);
      persist_trace(*entry);
      nlohmann::json payload = {{"id", entry->id},
                                {"round", entry->state.round},
                                {"removed", click_to_json(removed)},
                                {"mask", rle_to_json(rle_encode(entry->mask))},
                                {"iou", last_iou(*entry)}};
      publish(*entry, "undo", payload);
      return ApiResponse{200, "application/json", payload.dump()};
    });
  }

  ApiResponse get_state(const std::string& id) {
    return guarded([&] {
      auto entry = find(id);
      touch(*entry);
      std::lock_guard lock(entry->view_mu);
      return ApiResponse{200, "application/json", entry->snapshot.dump()};
    });
  }

  ApiResponse get_mask_png(const std::string& id) {
    return guarded([&] {
      auto entry = find(id);
      touch(*entry);
      std::lock_guard lock(entry->view_mu);
      const auto png = encode_png(to_raw(entry->mask));
      return ApiResponse{200, "image/png", std::string(png.begin(), png.end())};
    });
  }

  /// Registers a sink for session events and immediately sends it a snapshot.
  /// Returns nullopt for an unknown session.
  std::optional<std::uint64_t> subscribe(const std::string& id, EventSink sink) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(store_mu_);
      auto it = store_.find(id);
      if (it == store_.end()) return std::nullopt;
      entry = it->second;
    }
    std::lock_guard lock(entry->view_mu);
    const std::uint64_t token = next_token_++;
    nlohmann::json msg = entry->snapshot;
    msg["type"] = "snapshot";
    sink(msg.dump());
    entry->sinks[token] = std::move(sink);
    return token;
  }

  void unsubscribe(const std::string& id, std::uint64_t token) {
    std::lock_guard lock(store_mu_);
    auto it = store_.find(id);
    if (it == store_.end()) return;
    std::lock_guard view(it->second->view_mu);
    it->second->sinks.erase(token);
  }

  /// Drops sessions idle for longer than the configured timeout. Sessions with
  /// a request in flight are kept. Returns the number evicted.
  std::size_t evict_idle(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now()) {
    std::vector<std::shared_ptr<Entry>> gone;
    {
      std::lock_guard lock(store_mu_);
      for (auto it = store_.begin(); it != store_.end();) {
        const auto last = std::chrono::steady_clock::time_point(
            std::chrono::steady_clock::duration(it->second->last_used.load()));
        std::unique_lock busy(it->second->busy, std::try_to_lock);
        if (now - last > cfg_.idle_timeout && busy.owns_lock()) {
          gone.push_back(it->second);
          it = store_.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (auto& e : gone) {
      spdlog::info("session {} evicted after idling", e->id);
      std::lock_guard lock(e->view_mu);
      const std::string msg = nlohmann::json{{"type", "expired"}, {"id", e->id}}.dump();
      for (auto& [token, sink] : e->sinks) sink(msg);
      e->sinks.clear();
    }
    return gone.size();
  }

  /// Recreates every session persisted under the trace directory by replaying
  /// its human clicks. Returns the number restored.
  std::size_t restore() {
    namespace fs = std::filesystem;
    if (!cfg_.trace_dir) return 0;
    std::size_t n = 0;
    for (const auto& dir : fs::directory_iterator(*cfg_.trace_dir)) {
      if (!dir.is_directory() || !fs::exists(dir.path() / "session.json")) continue;
      try {
        const auto meta = nlohmann::json::parse(slurp(dir.path() / "session.json"));
        auto entry = std::make_shared<Entry>();
        entry->id = meta.at("id").get<std::string>();
        entry->created_at = meta.at("created_at").get<std::string>();
        entry->segmenter = meta.at("segmenter").get<std::string>();
        entry->cfg = session_config_from_json(meta.at("config"), SessionConfig{});
        entry->image = load_image(dir.path() / "image.png");
        if (fs::exists(dir.path() / "gt.png")) entry->gt = load_mask(dir.path() / "gt.png");
        std::vector<Click> clicks;
        for (const auto& r : read_trace_file((dir.path() / "trace.jsonl").string())) clicks.push_back(r.human);
        rebuild(*entry, clicks);
        std::lock_guard lock(store_mu_);
        issued_.insert(entry->id);
        store_[entry->id] = entry;
        ++n;
      } catch (const std::exception& e) {
        spdlog::warn("could not restore session from {}: {}", dir.path().string(), e.what());
      }
    }
    return n;
  }

  bool has_session(const std::string& id) const {
    std::lock_guard lock(store_mu_);
    return store_.count(id) != 0;
  }

  std::size_t session_count() const {
    std::lock_guard lock(store_mu_);
    return store_.size();
  }

 private:
  struct Entry {
    std::string id;
    std::string created_at;
    SessionConfig cfg;
    std::string segmenter;
    Image image;
    std::optional<BinaryMask> gt;

    // Guarded by `busy`.
    std::mutex busy;
    std::unique_ptr<Segmenter> seg;
    SessionState state;
    std::vector<RoundRecord> rounds;

    // Published view, guarded by `view_mu` so reads never wait on a forward pass.
    std::mutex view_mu;
    BinaryMask mask;
    nlohmann::json snapshot;
    std::map<std::uint64_t, EventSink> sinks;

    std::atomic<std::chrono::steady_clock::rep> last_used{0};
  };

  static std::vector<std::string> split_path(std::string_view target) {
    target = target.substr(0, target.find('?'));
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= target.size()) {
      const auto slash = target.find('/', pos);
      const auto end = slash == std::string_view::npos ? target.size() : slash;
      if (end > pos) parts.emplace_back(target.substr(pos, end - pos));
      if (slash == std::string_view::npos) break;
      pos = slash + 1;
    }
    return parts;
  }

  static ApiResponse not_found() { return detail::error_response(404, "no such resource"); }
  static ApiResponse method_not_allowed() { return detail::error_response(405, "method not allowed"); }

  template <typename F>
  static ApiResponse guarded(F&& f) {
    try {
      return f();
    } catch (const detail::ApiError& e) {
      return detail::error_response(e.status(), e.what());
    } catch (const InputError& e) {
      return detail::error_response(400, e.what());
    } catch (const ShapeError& e) {
      return detail::error_response(400, e.what());
    } catch (const ConfigError& e) {
      return detail::error_response(400, e.what());
    } catch (const std::exception& e) {
      spdlog::error("request failed: {}", e.what());
      return detail::error_response(500, e.what());
    }
  }

  static nlohmann::json parse_body(const std::string& body) {
    try {
      auto j = nlohmann::json::parse(body.empty() ? "{}" : body);
      if (!j.is_object()) throw InputError("request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("malformed JSON: ") + e.what());
    }
  }

  static Click parse_click(const nlohmann::json& j, int index) {
    if (!j.is_object()) throw InputError("click must be an object");
    try {
      Click c;
      c.pos = {j.at("row").get<int>(), j.at("col").get<int>()};
      c.polarity = parse_polarity(j.value("polarity", std::string("positive")));
      c.source = ClickSource::kHuman;
      c.index = index;
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("click: ") + e.what());
    }
  }

  static std::vector<Click> parse_click_list(const nlohmann::json& j) {
    if (!j.is_array()) throw InputError("field 'clicks' must be an array");
    std::vector<Click> out;
    for (const auto& c : j) out.push_back(parse_click(c, 0));
    return out;
  }

  Image decode_upload_image(const std::string& b64) const {
    RawImage raw;
    try {
      raw = decode_any(detail::base64_decode(b64), 3);
    } catch (const IoError& e) {
      throw InputError(std::string("image: ") + e.what());
    }
    check_size(raw.shape);
    return image_from_raw(raw);
  }

  BinaryMask decode_upload_mask(const std::string& b64) const {
    try {
      auto m = decode_mask(detail::base64_decode(b64));
      check_size(m.shape());
      return m;
    } catch (const IoError& e) {
      throw InputError(std::string("gt: ") + e.what());
    }
  }

  void check_size(Shape s) const {
    if (s.size() > cfg_.max_image_px) {
      throw detail::ApiError(413, "image has " + std::to_string(s.size()) + " pixels, limit is " +
                                      std::to_string(cfg_.max_image_px));
    }
  }

  std::string new_id() {
    std::lock_guard lock(store_mu_);
    std::random_device rd;
    for (;;) {
      const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::string id = fmt::format("{:016x}", v);
      if (issued_.insert(id).second) return id;
    }
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lock(store_mu_);
    auto it = store_.find(id);
    if (it == store_.end()) throw detail::ApiError(404, "unknown session " + id);
    return it->second;
  }

  static void touch(Entry& e) { e.last_used = std::chrono::steady_clock::now().time_since_epoch().count(); }

  std::unique_ptr<Segmenter> build_segmenter(const Entry& e) const {
    if (auto it = cfg_.custom_segmenters.find(e.segmenter); it != cfg_.custom_segmenters.end()) {
      return it->second(e.image, e.gt);
    }
    const SegmenterSpec spec = parse_segmenter_spec(e.segmenter);
    // Clients may not start arbitrary programs; only the operator's choice runs.
    if (spec.kind == "subprocess" && e.segmenter != cfg_.default_segmenter) {
      throw ConfigError("subprocess segmenters are limited to the server default");
    }
    return make_segmenter(spec, e.gt, e.cfg.rng_seed);
  }

  /// Fresh state and a fresh segmenter instance.
  void reset(Entry& e) const {
    e.seg = build_segmenter(e);
    e.state = SessionState::fresh(e.image, e.gt, e.cfg);
    e.rounds.clear();
    refresh_view(e);
    touch(e);
  }

  RoundResult apply(Entry& e, Click c) const {
    c.source = ClickSource::kHuman;
    const RoundResult r = apply_human_click(e.state, c, *e.seg, e.cfg);
    e.rounds.push_back(to_record(r));
    refresh_view(e);
    return r;
  }

  void rebuild(Entry& e, const std::vector<Click>& clicks) const {
    reset(e);
    for (const Click& c : clicks) apply(e, c);
  }

  /// Applies a click; on a segmenter failure the previous state is recovered
  /// by replay before the error propagates.
  RoundResult apply_or_restore(Entry& e, const Click& c) const {
    const std::vector<Click> before = e.state.human_clicks;
    try {
      return apply(e, c);
    } catch (...) {
      try {
        rebuild(e, before);
      } catch (const std::exception& re) {
        spdlog::error("session {} could not be restored: {}", e.id, re.what());
      }
      throw;
    }
  }

  static nlohmann::json last_iou(const Entry& e) {
    if (e.rounds.empty() || !e.rounds.back().iou) return nullptr;
    return *e.rounds.back().iou;
  }

  static nlohmann::json click_record(const Click& c) {
    auto j = click_to_json(c);
    j["round"] = c.index;
    return j;
  }

  void refresh_view(Entry& e) const {
    nlohmann::json human = nlohmann::json::array();
    for (const Click& c : e.state.human_clicks) human.push_back(click_record(c));
    nlohmann::json pseudo = nlohmann::json::array();
    for (const Click& c : e.state.pseudo_clicks) pseudo.push_back(click_record(c));
    nlohmann::json ious = nlohmann::json::array();
    for (const auto& r : e.rounds) ious.push_back(r.iou ? nlohmann::json(*r.iou) : nlohmann::json(nullptr));
    BinaryMask mask = e.state.mask(e.cfg.tau);
    nlohmann::json snap = {{"id", e.id},
                           {"created_at", e.created_at},
                           {"segmenter", e.segmenter},
                           {"config", session_config_to_json(e.cfg)},
                           {"height", e.image.shape.height},
                           {"width", e.image.shape.width},
                           {"has_gt", e.gt.has_value()},
                           {"round", e.state.round},
                           {"human_clicks", human},
                           {"pseudo_clicks", pseudo},
                           {"iou_history", ious},
                           {"mask", rle_to_json(rle_encode(mask))}};
    std::lock_guard lock(e.view_mu);
    e.mask = std::move(mask);
    e.snapshot = std::move(snap);
  }

  nlohmann::json round_payload(const Entry& e, const RoundResult& r, bool include_prob) const {
    nlohmann::json pseudo = nlohmann::json::array();
    for (const Click& c : r.pseudo) pseudo.push_back(click_record(c));
    nlohmann::json j = {{"id", e.id},
                        {"round", r.round},
                        {"human", click_record(r.human)},
                        {"pseudo", pseudo},
                        {"mask", rle_to_json(rle_encode(threshold(r.prob_final, e.cfg.tau)))},
                        {"iou", r.iou_final ? nlohmann::json(*r.iou_final) : nlohmann::json(nullptr)},
                        {"iou_initial", r.iou_initial ? nlohmann::json(*r.iou_initial) : nlohmann::json(nullptr)}};
    if (include_prob) j["prob_png"] = detail::base64_encode(encode_png(to_raw(r.prob_final)));
    return j;
  }

  static void publish(Entry& e, const std::string& type, nlohmann::json payload) {
    payload["type"] = type;
    const std::string msg = payload.dump();
    std::lock_guard lock(e.view_mu);
    for (auto& [token, sink] : e.sinks) sink(msg);
  }

  static std::string slurp(const std::filesystem::path& p) {
    const auto bytes = read_file_bytes(p);
    return {bytes.begin(), bytes.end()};
  }

  void persist_meta(const Entry& e) const {
    if (!cfg_.trace_dir) return;
    const auto dir = *cfg_.trace_dir / e.id;
    std::filesystem::create_directories(dir);
    const std::string meta = nlohmann::json{{"id", e.id},
                                            {"created_at", e.created_at},
                                            {"segmenter", e.segmenter},
                                            {"config", session_config_to_json(e.cfg)}}
                                 .dump(2) + "\n";
    write_file_bytes(dir / "session.json",
                     std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(meta.data()), meta.size()));
    write_file_bytes(dir / "image.png", encode_png(to_raw(e.image)));
    if (e.gt) write_file_bytes(dir / "gt.png", encode_png(to_raw(*e.gt)));
  }

  void persist_trace(const Entry& e) const {
    if (!cfg_.trace_dir) return;
    write_trace_file((*cfg_.trace_dir / e.id / "trace.jsonl").string(), e.rounds);
  }

  ServiceConfig cfg_;
  mutable std::mutex store_mu_;
  std::map<std::string, std::shared_ptr<Entry>> store_;
  std::set<std::string> issued_;
  std::atomic<std::uint64_t> next_token_{1};
};

}  // namespace clickloop
