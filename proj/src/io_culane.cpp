#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "lanekit/io.hpp"

namespace lanekit {

namespace {

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::optional<double> parse_number(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string strip_leading_slash(std::string s) {
  while (!s.empty() && s.front() == '/') s.erase(s.begin());
  return s;
}

}  // namespace

std::vector<LanePolyline> parse_culane_lines(std::istream& in, const std::string& source) {
  std::vector<LanePolyline> lanes;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto tokens = split_ws(text);
    if (tokens.empty()) continue;
    if (tokens.size() % 2 != 0) {
      throw ParseError(source, line, "odd number of coordinates (" + std::to_string(tokens.size()) + ")");
    }
    LanePolyline lane;
    lane.points.reserve(tokens.size() / 2);
    for (std::size_t i = 0; i < tokens.size(); i += 2) {
      const auto x = parse_number(tokens[i]);
      const auto y = parse_number(tokens[i + 1]);
      if (!x || !y) {
        const std::string_view bad = !x ? tokens[i] : tokens[i + 1];
        throw ParseError(source, line, "non-numeric token '" + std::string(bad) + "'");
      }
      lane.points.push_back({*x, *y});
    }
    std::stable_sort(lane.points.begin(), lane.points.end(),
                     [](const Point2& a, const Point2& b) { return a.y < b.y; });
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

std::vector<LanePolyline> read_culane_lines_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_culane_lines(in, path.string());
}

void write_culane_lines(std::ostream& out, const std::vector<LanePolyline>& lanes) {
  std::string buffer;
  for (const LanePolyline& lane : lanes) {
    buffer.clear();
    for (std::size_t i = 0; i < lane.points.size(); ++i) {
      if (i > 0) buffer.push_back(' ');
      append_number(buffer, lane.points[i].x);
      buffer.push_back(' ');
      append_number(buffer, lane.points[i].y);
    }
    buffer.push_back('\n');
    out << buffer;
  }
}

void write_culane_lines_file(const std::filesystem::path& path, const std::vector<LanePolyline>& lanes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_culane_lines(out, lanes);
}

void CategoryMap::add(std::string prefix, Category category) {
  rules_.emplace_back(strip_leading_slash(std::move(prefix)), category);
}

Category CategoryMap::lookup(const std::string& frame_id) const {
  const std::string id = strip_leading_slash(frame_id);
  std::size_t best_len = 0;
  Category best = Category::kNormal;
  bool found = false;
  for (const auto& [prefix, category] : rules_) {
    if (id.compare(0, prefix.size(), prefix) == 0 && (!found || prefix.size() > best_len)) {
      best_len = prefix.size();
      best = category;
      found = true;
    }
  }
  return best;
}

CategoryMap read_category_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  CategoryMap map;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    const auto tokens = split_ws(text);
    if (tokens.empty()) continue;
    if (tokens.size() < 2) throw ParseError(path.string(), line, "expected '<prefix> <category>'");
    std::string name;
    for (std::size_t i = 1; i < tokens.size(); ++i) name += tokens[i];
    const auto category = parse_category(name);
    if (!category) throw ParseError(path.string(), line, "unknown category '" + name + "'");
    map.add(std::string(tokens[0]), *category);
  }
  return map;
}

void write_category_map(const std::filesystem::path& path, const CategoryMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [prefix, category] : map.rules()) out << prefix << ' ' << category_name(category) << '\n';
}

std::string culane_annotation_path(const std::string& frame_id) {
  std::string id = strip_leading_slash(frame_id);
  const auto slash = id.find_last_of('/');
  const auto dot = id.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) id.resize(dot);
  return id + ".lines.txt";
}

DatasetManifest read_culane_list(const std::filesystem::path& list_path, const CategoryMap& categories) {
  std::ifstream in(list_path);
  if (!in) throw ParseError(list_path.string(), 0, "cannot open file");
  DatasetManifest manifest;
  manifest.root = list_path.parent_path();
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto tokens = split_ws(text);
    if (tokens.empty()) continue;
    std::string id(tokens.front());
    if (!seen.insert(strip_leading_slash(id)).second) {
      throw ParseError(list_path.string(), line, "duplicate frame id '" + id + "'");
    }
    manifest.entries.push_back({id, culane_annotation_path(id), categories.lookup(id)});
  }
  return manifest;
}

}  // namespace lanekit
