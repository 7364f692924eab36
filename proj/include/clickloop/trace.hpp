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

// Trace files: line-delimited JSON, one interaction round per line. See
// docs/trace_format.md for the field list.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clickloop/session.hpp"

namespace clickloop {

inline nlohmann::json click_to_json(const Click& c) {
  return {{"row", c.pos.row}, {"col", c.pos.col}, {"polarity", std::string(to_string(c.polarity))}};
}

inline Click click_from_json(const nlohmann::json& j, ClickSource source, int index) {
  Click c;
  c.pos = {j.at("row").get<int>(), j.at("col").get<int>()};
  c.polarity = parse_polarity(j.at("polarity").get<std::string>());
  c.source = source;
  c.index = index;
  return c;
}

inline nlohmann::json round_to_json(const RoundRecord& r) {
  nlohmann::json pseudo = nlohmann::json::array();
  for (const Click& c : r.pseudo) pseudo.push_back(click_to_json(c));
  nlohmann::json j;
  j["round"] = r.round;
  j["human"] = click_to_json(r.human);
  j["pseudo"] = std::move(pseudo);
  j["iou_initial"] = r.iou_initial ? nlohmann::json(*r.iou_initial) : nlohmann::json(nullptr);
  j["iou"] = r.iou ? nlohmann::json(*r.iou) : nlohmann::json(nullptr);
  return j;
}

inline RoundRecord round_from_json(const nlohmann::json& j) {
  RoundRecord r;
  r.round = j.at("round").get<int>();
  r.human = click_from_json(j.at("human"), ClickSource::kHuman, r.round);
  for (const auto& p : j.at("pseudo")) r.pseudo.push_back(click_from_json(p, ClickSource::kPseudo, r.round));
  if (j.contains("iou_initial") && !j["iou_initial"].is_null()) r.iou_initial = j["iou_initial"].get<double>();
  if (j.contains("iou") && !j["iou"].is_null()) r.iou = j["iou"].get<double>();
  return r;
}

inline std::string trace_to_jsonl(const std::vector<RoundRecord>& rounds) {
  std::string out;
  for (const auto& r : rounds) {
    out += round_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<RoundRecord> trace_from_jsonl(const std::string& text) {
  std::vector<RoundRecord> rounds;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rounds.push_back(round_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rounds;
}

inline void write_trace_file(const std::string& path, const std::vector<RoundRecord>& rounds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write trace file " + path);
  out << trace_to_jsonl(rounds);
  if (!out) throw IoError("failed writing trace file " + path);
}

inline std::vector<RoundRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read trace file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return trace_from_jsonl(buf.str());
}

}  // namespace clickloop
