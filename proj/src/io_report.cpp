#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lanekit/io.hpp"

namespace lanekit {

namespace {

using nlohmann::ordered_json;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) line += " | ";
      line += rows[r][c];
      if (c + 1 < rows[r].size()) line.append(widths[c] - rows[r][c].size(), ' ');
    }
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w;
      out += std::string(total + 3 * (widths.size() - 1), '-') + '\n';
    }
  }
  return out;
}

ordered_json counts_json(const LaneCounts& c) {
  ordered_json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = c.precision();
  j["recall"] = c.recall();
  j["f1"] = c.f1();
  return j;
}

LaneCounts counts_from_json(const ordered_json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>()};
}

}  // namespace

std::string render_table(const EvalReport& report, const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  if (report.metric == MetricKind::kTuSimple) {
    const TuSimpleTotals t = report.tusimple.value_or(TuSimpleTotals{});
    rows.push_back({"Algorithm", "Accuracy", "FP", "FN"});
    rows.push_back({name, fixed(t.accuracy(), 4), fixed(t.fp_rate(report.totals), 4),
                    fixed(t.fn_rate(report.totals), 4)});
    std::string out = render_rows(rows);
    out += "\npoints: " + std::to_string(t.correct_points) + " / " + std::to_string(t.gt_points) +
           "; lanes: gt " + std::to_string(t.gt_lanes) + ", pred " + std::to_string(t.pred_lanes) +
           "; TP " + std::to_string(report.totals.tp) + ", FP " + std::to_string(report.totals.fp) + ", FN " +
           std::to_string(report.totals.fn) + '\n';
    return out;
  }

  rows.push_back({"Category", name, "TP", "FP", "FN", "Frames"});
  for (const CategoryResult& row : report.per_category) {
    std::string value;
    if (row.category == Category::kCrossroad) {
      value = std::to_string(row.counts.fp);
    } else {
      value = row.frames == 0 ? "-" : fixed(100.0 * row.counts.f1(), 1);
    }
    rows.push_back({std::string(category_label(row.category)), value, std::to_string(row.counts.tp),
                    std::to_string(row.counts.fp), std::to_string(row.counts.fn), std::to_string(row.frames)});
  }
  rows.push_back({"Total", fixed(100.0 * report.totals.f1(), 1), std::to_string(report.totals.tp),
                  std::to_string(report.totals.fp), std::to_string(report.totals.fn)});
  return render_rows(rows) + "\nF1 in percent; Crossroad shows the FP count.\n";
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["metric"] = report.metric == MetricKind::kTuSimple ? "tusimple" : "culane";
  ordered_json config;
  ordered_json params = ordered_json::object();
  for (const auto& [key, value] : report.parameters) params[key] = value;
  config["parameters"] = std::move(params);
  config["notes"] = report.notes;
  j["config"] = std::move(config);

  ordered_json categories = ordered_json::array();
  for (const CategoryResult& row : report.per_category) {
    ordered_json r;
    r["category"] = std::string(category_name(row.category));
    r["frames"] = row.frames;
    const ordered_json counts = counts_json(row.counts);
    for (const auto& item : counts.items()) r[item.key()] = item.value();
    categories.push_back(std::move(r));
  }
  j["per_category"] = std::move(categories);

  ordered_json totals = counts_json(report.totals);
  if (report.tusimple) {
    const TuSimpleTotals& t = *report.tusimple;
    totals["accuracy"] = t.accuracy();
    totals["fp_rate"] = t.fp_rate(report.totals);
    totals["fn_rate"] = t.fn_rate(report.totals);
    totals["correct_points"] = t.correct_points;
    totals["gt_points"] = t.gt_points;
    totals["gt_lanes"] = t.gt_lanes;
    totals["pred_lanes"] = t.pred_lanes;
  }
  j["totals"] = std::move(totals);
  return j.dump(2) + '\n';
}

EvalReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError("<report>", 0, std::string("malformed JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<int>() != kReportSchema) {
      throw ParseError("<report>", 0, "unsupported report schema");
    }
    EvalReport report;
    const std::string metric = j.at("metric").get<std::string>();
    if (metric == "tusimple") {
      report.metric = MetricKind::kTuSimple;
    } else if (metric == "culane") {
      report.metric = MetricKind::kCulane;
    } else {
      throw ParseError("<report>", 0, "unknown metric '" + metric + "'");
    }
    for (const auto& [key, value] : j.at("config").at("parameters").items()) {
      report.parameters[key] = value.get<double>();
    }
    report.notes = j.at("config").at("notes").get<std::vector<std::string>>();
    for (const ordered_json& r : j.at("per_category")) {
      const auto category = parse_category(r.at("category").get<std::string>());
      if (!category) throw ParseError("<report>", 0, "unknown category");
      report.per_category.push_back({*category, r.at("frames").get<std::uint64_t>(), counts_from_json(r)});
    }
    const ordered_json& totals = j.at("totals");
    report.totals = counts_from_json(totals);
    if (totals.contains("gt_points")) {
      report.tusimple = TuSimpleTotals{totals.at("correct_points").get<std::uint64_t>(),
                                       totals.at("gt_points").get<std::uint64_t>(),
                                       totals.at("gt_lanes").get<std::uint64_t>(),
                                       totals.at("pred_lanes").get<std::uint64_t>()};
    }
    return report;
  } catch (const ordered_json::exception& e) {
    throw ParseError("<report>", 0, std::string("invalid report: ") + e.what());
  }
}

void write_report(const EvalReport& report, const std::filesystem::path& prefix, const std::string& name) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  const auto write = [](const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content) || !out.flush()) throw Error("cannot write " + path.string());
  };
  write(std::filesystem::path(prefix.string() + ".txt"), render_table(report, name));
  write(std::filesystem::path(prefix.string() + ".json"), report_to_json(report));
}

}  // namespace lanekit
