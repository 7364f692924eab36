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
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "clickloop/grid.hpp"
#include "clickloop/image_io.hpp"
#include "clickloop/random.hpp"

namespace clickloop {

/// One annotated object.
struct Instance {
  std::string id;
  Image image;
  BinaryMask gt;
};

/// Reads `<dir>/images/<id>.{png,ppm,pgm}` paired with `<dir>/masks/<id>.png`
/// (or .pgm). Unpaired images and masks are skipped with a warning; files that
/// fail to decode are fatal. Instances come back sorted by id.
inline std::vector<Instance> load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<Instance> out;
  const fs::path images = dir / "images";
  const fs::path masks = dir / "masks";
  if (!fs::is_directory(images)) return out;

  std::map<std::string, fs::path> image_files;
  for (const auto& e : fs::directory_iterator(images)) {
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") image_files[e.path().stem().string()] = e.path();
  }
  std::map<std::string, fs::path> mask_files;
  if (fs::is_directory(masks)) {
    for (const auto& e : fs::directory_iterator(masks)) {
      const auto ext = e.path().extension().string();
      if (ext == ".png" || ext == ".pgm") mask_files[e.path().stem().string()] = e.path();
    }
  }
  for (const auto& [id, mpath] : mask_files) {
    if (!image_files.count(id)) spdlog::warn("dataset: mask {} has no image, skipped", mpath.string());
  }
  for (const auto& [id, ipath] : image_files) {
    auto mit = mask_files.find(id);
    if (mit == mask_files.end()) {
      spdlog::warn("dataset: image {} has no mask, skipped", ipath.string());
      continue;
    }
    Instance inst{id, load_image(ipath), load_mask(mit->second)};
    if (inst.gt.shape() != inst.image.shape) {
      throw IoError(mit->second.string() + ": mask shape " + to_string(inst.gt.shape()) +
                    " differs from image " + to_string(inst.image.shape));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

enum class SynthKind { kRectangle, kEllipse, kRing };

/// Analytic object description; pixel (r, c) is sampled at its integer coordinates.
struct SynthShape {
  SynthKind kind = SynthKind::kEllipse;
  double cy = 0, cx = 0;  // center
  double ry = 0, rx = 0;  // half extents / semi-axes
  double inner = 0.5;     // ring hole scale relative to the outer ellipse

  bool contains(int r, int c) const {
    const double dy = (r - cy) / ry;
    const double dx = (c - cx) / rx;
    switch (kind) {
      case SynthKind::kRectangle: return std::abs(r - cy) <= ry && std::abs(c - cx) <= rx;
      case SynthKind::kEllipse: return dx * dx + dy * dy <= 1.0;
      case SynthKind::kRing: {
        const double q = dx * dx + dy * dy;
        return q <= 1.0 && q > inner * inner;
      }
    }
    return false;
  }
};

struct SynthSpec {
  int count = 20;
  int size = 64;
  std::uint64_t seed = 0;
  double contrast = 0.4;
  double noise = 0.05;
  std::vector<SynthKind> kinds{SynthKind::kRectangle, SynthKind::kEllipse, SynthKind::kRing};

  void validate() const {
    if (count < 0) throw ConfigError("synth: count must be >= 0");
    if (size < 16) throw ConfigError("synth: size must be >= 16");
    if (kinds.empty()) throw ConfigError("synth: no shape kinds");
    if (!(contrast >= 0.0 && contrast <= 1.0)) throw ConfigError("synth: contrast must lie in [0, 1]");
    if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("synth: noise must lie in [0, 1]");
  }
};

/// Parses "count=50,size=64,seed=7,contrast=0.4,noise=0.05,shapes=ellipse+rect+ring".
inline SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("synth spec item '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "count") {
        spec.count = std::stoi(val);
      } else if (key == "size") {
        spec.size = std::stoi(val);
      } else if (key == "seed") {
        spec.seed = std::stoull(val);
      } else if (key == "contrast") {
        spec.contrast = std::stod(val);
      } else if (key == "noise") {
        spec.noise = std::stod(val);
      } else if (key == "shapes") {
        spec.kinds.clear();
        std::istringstream kin(val);
        std::string k;
        while (std::getline(kin, k, '+')) {
          if (k == "rect" || k == "rectangle") spec.kinds.push_back(SynthKind::kRectangle);
          else if (k == "ellipse") spec.kinds.push_back(SynthKind::kEllipse);
          else if (k == "ring") spec.kinds.push_back(SynthKind::kRing);
          else throw ConfigError("synth: unknown shape '" + k + "'");
        }
      } else {
        throw ConfigError("synth spec: unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("synth spec: bad value for '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

struct SynthInstance {
  Instance instance;
  SynthShape shape;
};

inline std::vector<SynthInstance> synth_dataset_detailed(const SynthSpec& spec) {
  spec.validate();
  std::vector<SynthInstance> out;
  const double s = spec.size;
  for (int i = 0; i < spec.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04d", i);
    Rng rng(split_seed(spec.seed, id));

    SynthShape shape;
    shape.kind = spec.kinds[uniform_int<std::size_t>(rng, 0, spec.kinds.size() - 1)];
    shape.cy = uniform_real(rng, 0.35 * s, 0.65 * s);
    shape.cx = uniform_real(rng, 0.35 * s, 0.65 * s);
    shape.ry = uniform_real(rng, 0.15 * s, 0.3 * s);
    shape.rx = uniform_real(rng, 0.15 * s, 0.3 * s);
    shape.inner = uniform_real(rng, 0.35, 0.6);

    const double bg = uniform_real(rng, 0.2, 0.8);
    const bool brighter = uniform_int(rng, 0, 1) == 1;
    const bool can_up = bg + spec.contrast <= 1.0;
    const bool can_down = bg - spec.contrast >= 0.0;
    const double fg = (can_up && (brighter || !can_down)) ? bg + spec.contrast : bg - spec.contrast;

    Instance inst{id, Image(Shape{spec.size, spec.size}), BinaryMask(Shape{spec.size, spec.size})};
    for (int r = 0; r < spec.size; ++r) {
      for (int c = 0; c < spec.size; ++c) {
        const bool inside = shape.contains(r, c);
        inst.gt(r, c) = inside ? 1 : 0;
        const double n = spec.noise > 0.0 ? uniform_real(rng, -spec.noise, spec.noise) : 0.0;
        inst.image.set_gray(r, c, static_cast<float>(std::clamp((inside ? fg : bg) + n, 0.0, 1.0)));
      }
    }
    out.push_back({std::move(inst), shape});
  }
  return out;
}

inline std::vector<Instance> synth_dataset(const SynthSpec& spec) {
  std::vector<Instance> out;
  for (auto& si : synth_dataset_detailed(spec)) out.push_back(std::move(si.instance));
  return out;
}

}  // namespace clickloop
