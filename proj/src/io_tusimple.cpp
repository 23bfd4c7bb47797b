#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "lanekit/io.hpp"

namespace lanekit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<double> number_list(const json& value, const std::string& source, std::size_t line,
                                const std::string& what) {
  if (!value.is_array()) throw ParseError(source, line, what + " must be an array");
  std::vector<double> out;
  out.reserve(value.size());
  for (const json& v : value) {
    if (!v.is_number()) throw ParseError(source, line, what + " contains a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

ordered_json number_json(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

}  // namespace

TuSimpleReader::TuSimpleReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

std::optional<TuSimpleRecord> TuSimpleReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;

    json object;
    try {
      object = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source_, line_, std::string("malformed JSON: ") + e.what());
    }
    if (!object.is_object()) throw ParseError(source_, line_, "expected a JSON object");
    if (!object.contains("lanes")) throw ParseError(source_, line_, "missing key \"lanes\"");
    if (!object.contains("raw_file") || !object["raw_file"].is_string()) {
      throw ParseError(source_, line_, "missing string key \"raw_file\"");
    }

    TuSimpleRecord record;
    record.raw_file = object["raw_file"].get<std::string>();
    if (object.contains("h_samples")) {
      record.h_samples = number_list(object["h_samples"], source_, line_, "h_samples");
    }
    const json& lanes = object["lanes"];
    if (!lanes.is_array()) throw ParseError(source_, line_, "\"lanes\" must be an array");
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      record.lanes.push_back(number_list(lanes[i], source_, line_, "lane " + std::to_string(i)));
      if (record.h_samples && record.lanes.back().size() != record.h_samples->size()) {
        throw ParseError(source_, line_,
                         "lane " + std::to_string(i) + " has " + std::to_string(record.lanes.back().size()) +
                             " entries, expected " + std::to_string(record.h_samples->size()));
      }
    }
    if (object.contains("run_time")) {
      if (!object["run_time"].is_number()) throw ParseError(source_, line_, "\"run_time\" must be numeric");
      record.run_time = object["run_time"].get<double>();
    }
    return record;
  }
  return std::nullopt;
}

std::vector<TuSimpleRecord> parse_tusimple(std::istream& in, const std::string& source) {
  TuSimpleReader reader(in, source);
  std::vector<TuSimpleRecord> records;
  while (auto record = reader.next()) records.push_back(std::move(*record));
  return records;
}

std::vector<TuSimpleRecord> read_tusimple_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_tusimple(in, path.string());
}

std::string format_tusimple_record(const TuSimpleRecord& record) {
  ordered_json object;
  ordered_json lanes = ordered_json::array();
  for (const SampledLane& lane : record.lanes) {
    ordered_json xs = ordered_json::array();
    for (double x : lane) xs.push_back(number_json(x));
    lanes.push_back(std::move(xs));
  }
  object["lanes"] = std::move(lanes);
  if (record.h_samples) {
    ordered_json ys = ordered_json::array();
    for (double y : *record.h_samples) ys.push_back(number_json(y));
    object["h_samples"] = std::move(ys);
  }
  object["raw_file"] = record.raw_file;
  if (record.run_time) object["run_time"] = number_json(*record.run_time);
  return object.dump();
}

void write_tusimple(std::ostream& out, const std::vector<TuSimpleRecord>& records) {
  for (const TuSimpleRecord& record : records) out << format_tusimple_record(record) << '\n';
}

std::vector<TuSimpleFrame> pair_tusimple(const std::vector<TuSimpleRecord>& gt,
                                         const std::vector<TuSimpleRecord>& pred) {
  std::unordered_map<std::string, const TuSimpleRecord*> by_file;
  for (const TuSimpleRecord& p : pred) {
    if (!by_file.emplace(p.raw_file, &p).second) {
      throw InvalidArgument("duplicate prediction for " + p.raw_file);
    }
  }
  std::vector<TuSimpleFrame> frames;
  frames.reserve(gt.size());
  for (const TuSimpleRecord& g : gt) {
    if (!g.h_samples) throw InvalidArgument("ground truth for " + g.raw_file + " lacks h_samples");
    const auto it = by_file.find(g.raw_file);
    if (it == by_file.end()) throw InvalidArgument("no prediction for " + g.raw_file);
    const std::size_t samples = g.h_samples->size();
    for (std::size_t i = 0; i < it->second->lanes.size(); ++i) {
      if (it->second->lanes[i].size() != samples) {
        throw InvalidArgument("prediction for " + g.raw_file + ": lane " + std::to_string(i) + " has " +
                              std::to_string(it->second->lanes[i].size()) + " entries, expected " +
                              std::to_string(samples));
      }
    }
    frames.push_back({*g.h_samples, g.lanes, it->second->lanes});
  }
  return frames;
}

}  // namespace lanekit
