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

// Out-of-process segmenters. The plug-in reads request frames on stdin and
// writes response frames on stdout; see docs/subprocess_protocol.md.
//
//   frame    := u32 payload_length, payload
//   payload  := u32 height, u32 width, u32 channels, f32[channels * height * width]
//
// All integers and floats are little-endian; planes are row-major and
// channel-major. Requests carry 8 planes
//   [R, G, B, prev_mask, human+, human-, pseudo+, pseudo-]
// and responses carry 3 planes [prob, fp, fn] with values in [0, 1].

#pragma once

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "clickloop/click_encoding.hpp"
#include "clickloop/segmenter.hpp"

namespace clickloop {
namespace protocol {

inline constexpr std::uint32_t kRequestChannels = 8;
inline constexpr std::uint32_t kResponseChannels = 3;
inline constexpr std::uint32_t kMaxPayloadBytes = 1U << 30;

static_assert(std::endian::native == std::endian::little,
              "frame encoding assumes a little-endian host");

struct Frame {
  Shape shape{};
  std::uint32_t channels = 0;
  std::vector<float> planes;  // channel-major
};

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  std::memcpy(&v, in.data() + at, 4);
  return v;
}

/// Serialises a frame including its length prefix.
inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.planes.size() != f.shape.size() * f.channels) throw InputError("frame plane size mismatch");
  std::vector<std::uint8_t> out;
  const std::size_t payload = 12 + f.planes.size() * 4;
  out.reserve(4 + payload);
  put_u32(out, static_cast<std::uint32_t>(payload));
  put_u32(out, static_cast<std::uint32_t>(f.shape.height));
  put_u32(out, static_cast<std::uint32_t>(f.shape.width));
  put_u32(out, f.channels);
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(f.planes.data());
  out.insert(out.end(), bytes, bytes + f.planes.size() * 4);
  return out;
}

/// Parses a payload (without its length prefix).
inline Frame decode_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() < 12) throw IoError("frame payload shorter than its header");
  Frame f;
  f.shape.height = static_cast<int>(get_u32(payload, 0));
  f.shape.width = static_cast<int>(get_u32(payload, 4));
  f.channels = get_u32(payload, 8);
  if (f.shape.height < 1 || f.shape.width < 1) throw IoError("frame has empty dimensions");
  const std::size_t expect = 12 + f.shape.size() * f.channels * 4;
  if (payload.size() != expect) {
    throw IoError("frame payload is " + std::to_string(payload.size()) + " bytes, expected " +
                  std::to_string(expect));
  }
  f.planes.resize(f.shape.size() * f.channels);
  std::memcpy(f.planes.data(), payload.data() + 12, f.planes.size() * 4);
  return f;
}

inline Frame make_request(const SegmentationInput& in) {
  const Shape s = in.shape();
  Frame f{s, kRequestChannels, std::vector<float>(s.size() * kRequestChannels, 0.0F)};
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) f.planes[ch * n + i] = in.image.rgb[i * 3 + ch];
    f.planes[3 * n + i] = static_cast<float>(in.prev_mask.values()[i]);
  }
  const auto clicks = merge_encodings(in.human, in.pseudo);
  std::copy(clicks.data.begin(), clicks.data.end(), f.planes.begin() + 4 * n);
  return f;
}

inline Frame make_response(const SegmenterOutput& out) {
  const Shape s = out.prob.shape();
  Frame f{s, kResponseChannels, std::vector<float>(s.size() * kResponseChannels, 0.0F)};
  const std::size_t n = s.size();
  const ProbabilityMap* maps[3] = {&out.prob, &out.errors.fp, &out.errors.fn};
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < n; ++i) f.planes[ch * n + i] = static_cast<float>(maps[ch]->values()[i]);
  }
  return f;
}

inline SegmenterOutput parse_response(const Frame& f, Shape expected) {
  if (f.shape != expected) {
    throw IoError("response shape " + to_string(f.shape) + " differs from request " +
                  to_string(expected));
  }
  if (f.channels != kResponseChannels) throw IoError("response must carry 3 planes");
  const std::size_t n = expected.size();
  SegmenterOutput out{ProbabilityMap(expected), ErrorMapPair::zeros(expected)};
  ProbabilityMap* maps[3] = {&out.prob, &out.errors.fp, &out.errors.fn};
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = f.planes[ch * n + i];
      if (!(v >= 0.0 && v <= 1.0)) throw IoError("response value outside [0, 1]");
      maps[ch]->values()[i] = v;
    }
  }
  return out;
}

// Blocking full reads/writes on file descriptors.
inline void write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw IoError(std::string("write failed: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
}

/// Returns false on clean EOF before the first byte.
inline bool read_all(int fd, std::span<std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::read(fd, data.data() + done, data.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw IoError(std::string("read failed: ") + std::strerror(errno));
    if (n == 0) {
      if (done == 0) return false;
      throw IoError("unexpected end of stream inside a frame");
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

/// Reads one length-prefixed frame. Returns false on clean EOF between frames.
inline bool read_frame(int fd, Frame& out) {
  std::uint8_t len_bytes[4];
  if (!read_all(fd, len_bytes)) return false;
  std::uint32_t len = 0;
  std::memcpy(&len, len_bytes, 4);
  if (len > kMaxPayloadBytes) throw IoError("frame payload too large");
  std::vector<std::uint8_t> payload(len);
  if (!read_all(fd, payload)) throw IoError("unexpected end of stream inside a frame");
  out = decode_payload(payload);
  return true;
}

}  // namespace protocol

/// Runs `command` through /bin/sh and talks the frame protocol over its
/// stdin/stdout. The child lives as long as this object.
class SubprocessSegmenter final : public Segmenter {
 public:
  explicit SubprocessSegmenter(std::string command) : command_(std::move(command)) { spawn(); }
  ~SubprocessSegmenter() override { shutdown(); }

  SubprocessSegmenter(const SubprocessSegmenter&) = delete;
  SubprocessSegmenter& operator=(const SubprocessSegmenter&) = delete;

  std::string name() const override { return "subprocess:" + command_; }

  SegmenterOutput predict(const SegmentationInput& input) override {
    input.validate();
    const auto bytes = protocol::encode_frame(protocol::make_request(input));
    protocol::write_all(to_child_, bytes);
    protocol::Frame reply;
    if (!protocol::read_frame(from_child_, reply)) {
      throw IoError("segmenter process '" + command_ + "' closed its output");
    }
    return protocol::parse_response(reply, input.shape());
  }

 private:
  void spawn() {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) throw IoError("pipe() failed");
    ::signal(SIGPIPE, SIG_IGN);
    pid_ = ::fork();
    if (pid_ < 0) throw IoError("fork() failed");
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
  }

  void shutdown() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
};

}  // namespace clickloop
