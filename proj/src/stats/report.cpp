#include "emosura/stats/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "emosura/bench/detection.hpp"
#include "emosura/csv.hpp"
#include "emosura/stats/correlation.hpp"

namespace emosura::report {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_report(v));
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

json rounded(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "n/a";
  return round_report(*v);
}

std::size_t column_index(std::string_view name) {
  for (std::size_t i = 0; i < kMetricColumns.size(); ++i) {
    if (kMetricColumns[i] == name) return i;
  }
  throw Error("unknown metric column " + std::string(name));
}

std::optional<double> parse_cell(const std::string& cell) {
  if (cell.empty() || cell == "n/a") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw Error("bad number");
    return v;
  } catch (const std::exception&) {
    throw Error("invalid numeric cell '" + cell + "'");
  }
}

json rate_json(std::size_t num, std::size_t den) {
  if (den == 0) return "n/a";
  return round_report(static_cast<double>(num) / static_cast<double>(den));
}

json length_block(const std::vector<std::size_t>& lengths) {
  if (lengths.empty()) return "n/a";
  double sum = 0.0;
  std::size_t mx = 0;
  for (const auto l : lengths) {
    sum += static_cast<double>(l);
    mx = std::max(mx, l);
  }
  const double mean = sum / static_cast<double>(lengths.size());
  double sq = 0.0;
  for (const auto l : lengths) sq += (static_cast<double>(l) - mean) * (static_cast<double>(l) - mean);
  return {{"mean_chars", round_report(mean)},
          {"std_chars", round_report(std::sqrt(sq / static_cast<double>(lengths.size())))},
          {"max_chars", mx}};
}

}  // namespace

double round_report(double v) {
  if (!std::isfinite(v)) return v;
  const double scale = std::pow(10.0, kDecimals);
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

std::vector<ScoreRow> rows_from_run(const RunManifest& run) {
  std::vector<ScoreRow> rows;
  for (const auto& sample : run.samples) {
    if (sample.systems.empty()) {
      ScoreRow row;
      row.sample_id = sample.sample_id;
      row.status = std::string(to_string(sample.status));
      rows.push_back(std::move(row));
      continue;
    }
    for (const auto& sys : sample.systems) {
      ScoreRow row;
      row.sample_id = sample.sample_id;
      row.system_id = sys.system_id;
      row.status = std::string(to_string(sys.status));
      if (sys.score) {
        row.metrics[0] = sys.score->all.s_p;
        row.metrics[1] = sys.score->all.s_r;
        row.metrics[2] = sys.score->all.s_f;
        row.metrics[3] = sys.score->descriptive.s_f;
        row.metrics[4] = sys.score->final_score;
      }
      row.metrics[5] = sys.baselines.bleu4;
      row.metrics[6] = sys.baselines.rouge_l;
      row.metrics[7] = sys.baselines.cider_d;
      row.mos_mean = sys.mos_mean;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string scores_csv(const std::vector<ScoreRow>& rows) {
  csv::Row header{"sample_id", "system_id"};
  for (const auto name : kMetricColumns) header.emplace_back(name);
  header.emplace_back("mos_mean");
  header.emplace_back("status");
  std::string out = csv::format_row(header);
  for (const auto& row : rows) {
    csv::Row cells{row.sample_id, row.system_id};
    for (const auto& m : row.metrics) cells.push_back(m ? fixed(*m, kDecimals) : std::string{});
    cells.push_back(row.mos_mean ? fixed(*row.mos_mean, kDecimals) : std::string{});
    cells.push_back(row.status);
    out += csv::format_row(cells);
  }
  return out;
}

std::vector<ScoreRow> parse_scores_csv(std::string_view text) {
  const auto table = csv::parse(text);
  if (table.empty()) throw Error("scores CSV is empty");
  const auto& header = table.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.contains("sample_id")) throw Error("scores CSV lacks a sample_id column");
  std::vector<ScoreRow> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    const auto cell = [&](const std::string& name) -> std::string {
      const auto it = col.find(name);
      return it != col.end() && it->second < cells.size() ? cells[it->second] : std::string{};
    };
    ScoreRow row;
    row.sample_id = cell("sample_id");
    row.system_id = cell("system_id");
    if (const auto s = cell("status"); !s.empty()) row.status = s;
    for (std::size_t m = 0; m < kMetricColumns.size(); ++m) row.metrics[m] = parse_cell(cell(std::string(kMetricColumns[m])));
    row.mos_mean = parse_cell(cell("mos_mean"));
    rows.push_back(std::move(row));
  }
  return rows;
}

void join_mos(std::vector<ScoreRow>& rows, std::string_view mos_csv) {
  const auto table = csv::parse(mos_csv);
  if (table.empty()) throw Error("MOS CSV is empty");
  const auto& header = table.front();
  std::optional<std::size_t> sample_col, system_col, mos_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "sample_id") sample_col = i;
    if (header[i] == "system_id") system_col = i;
    if (header[i] == "mos" || header[i] == "mos_mean") mos_col = i;
  }
  if (!sample_col || !mos_col) throw Error("MOS CSV needs sample_id and mos columns");

  const auto key_of = [&](const std::string& sample, const std::string& system) {
    return system_col ? sample + "/" + system : sample;
  };
  std::map<std::string, std::pair<double, std::size_t>> mos;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    const auto get = [&](std::size_t c) { return c < cells.size() ? cells[c] : std::string{}; };
    const auto value = parse_cell(get(*mos_col));
    if (!value) continue;
    auto& slot = mos[key_of(get(*sample_col), system_col ? get(*system_col) : std::string{})];
    slot.first += *value;
    ++slot.second;
  }

  std::set<std::string> used;
  std::set<std::string> missing;
  for (auto& row : rows) {
    const auto key = key_of(row.sample_id, row.system_id);
    if (const auto it = mos.find(key); it != mos.end()) {
      row.mos_mean = it->second.first / static_cast<double>(it->second.second);
      used.insert(key);
    } else {
      row.mos_mean.reset();
      missing.insert(key);
    }
  }
  for (const auto& [key, unused] : mos) {
    if (!used.contains(key)) missing.insert(key);
  }
  if (!missing.empty()) {
    std::vector<std::string> ids(missing.begin(), missing.end());
    std::string msg = "unmatched ids between scores and MOS:";
    for (const auto& id : ids) msg += " " + id;
    throw JoinMismatch(msg, std::move(ids));
  }
}

json correlation_block(const std::vector<ScoreRow>& rows) {
  json block = json::object();
  const bool any_mos = std::any_of(rows.begin(), rows.end(), [](const ScoreRow& r) { return r.mos_mean.has_value(); });
  if (!any_mos) return block;
  for (std::size_t m = 0; m < kMetricColumns.size(); ++m) {
    std::vector<double> x, y;
    std::map<std::string, stats::GroupedPair> groups;
    for (const auto& row : rows) {
      if (row.status == "errored" || !row.metrics[m] || !row.mos_mean) continue;
      x.push_back(*row.metrics[m]);
      y.push_back(*row.mos_mean);
      auto& g = groups[row.sample_id];
      g.x.push_back(*row.metrics[m]);
      g.y.push_back(*row.mos_mean);
    }
    json cell{{"n", x.size()}, {"pcc", "n/a"}, {"pcc_p", "n/a"}, {"kendall_tau", "n/a"},
              {"spearman_rho", "n/a"}, {"samplewise_tau", "n/a"}};
    try {
      const auto p = stats::pearson_test(x, y);
      cell["pcc"] = round_report(p.r);
      cell["pcc_p"] = rounded(p.p_value);
    } catch (const Error&) {
    }
    try {
      cell["kendall_tau"] = round_report(stats::kendall_tau(x, y));
    } catch (const Error&) {
    }
    try {
      cell["spearman_rho"] = round_report(stats::spearman(x, y));
    } catch (const Error&) {
    }
    std::vector<stats::GroupedPair> grouped;
    for (auto& [id, g] : groups) grouped.push_back(std::move(g));
    cell["samplewise_tau"] = rounded(stats::samplewise_tau(grouped).tau);
    block[std::string(kMetricColumns[m])] = std::move(cell);
  }
  return block;
}

json summary_from_rows(const std::vector<ScoreRow>& rows) {
  json summary;
  std::map<std::string, std::size_t> statuses;
  std::set<std::string> samples;
  std::map<std::string, std::vector<double>> finals;
  for (const auto& row : rows) {
    ++statuses[row.status];
    samples.insert(row.sample_id);
    if (row.metrics[column_index("final")] && !row.system_id.empty()) {
      finals[row.system_id].push_back(*row.metrics[column_index("final")]);
    }
  }
  summary["samples"] = samples.size();
  summary["rows"] = rows.size();
  summary["row_status_counts"] = statuses;
  json systems = json::object();
  for (const auto& [system, values] : finals) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    systems[system] = {{"n", values.size()}, {"mean_final", round_report(sum / static_cast<double>(values.size()))}};
  }
  summary["systems"] = systems;
  const auto corr = correlation_block(rows);
  if (!corr.empty()) summary["correlations"] = corr;
  return summary;
}

json summary_json(const RunManifest& run) {
  const auto rows = rows_from_run(run);
  json summary = summary_from_rows(rows);
  summary["run_id"] = run.run_id;
  summary["config_digest"] = run.config_digest;

  std::map<std::string, std::size_t> sample_statuses{{"scored", 0}, {"format_failed", 0}, {"errored", 0}};
  std::size_t verdicts = 0, verify_failures = 0, decompose_failures = 0, match_failures = 0, captions = 0;
  std::map<std::string, std::vector<std::size_t>> lengths;
  std::vector<std::size_t> all_lengths;
  std::vector<bench::DetectionEvent> detection;
  for (const auto& s : run.samples) {
    ++sample_statuses[std::string(to_string(s.status))];
    if (s.reference_format_failed) ++decompose_failures;
    ++captions;
    const SystemResult* gt = nullptr;
    const SystemResult* perturbed = nullptr;
    for (const auto& sys : s.systems) {
      ++captions;
      verdicts += sys.verdicts;
      verify_failures += sys.verify_format_failures;
      if (sys.decompose_format_failed) ++decompose_failures;
      if (sys.match_format_failed) ++match_failures;
      lengths[sys.system_id].push_back(sys.caption_chars);
      all_lengths.push_back(sys.caption_chars);
      if (sys.system_id == "gt") gt = &sys;
      if (sys.system_id.starts_with("perturbed")) perturbed = &sys;
    }
    if (s.perturbation_type && gt && perturbed && gt->score && perturbed->score) {
      detection.push_back({*s.perturbation_type,
                           bench::is_detected(perturbed->score->final_score, gt->score->final_score)});
    }
  }
  summary["sample_status_counts"] = sample_statuses;
  summary["format_failures"] = {{"verify_verdicts", verdicts},
                                {"verify_failures", verify_failures},
                                {"verify_failure_rate", rate_json(verify_failures, verdicts)},
                                {"decompose_failures", decompose_failures},
                                {"decomposed_captions", captions},
                                {"match_failures", match_failures}};
  json length = json::object();
  for (const auto& [system, values] : lengths) length[system] = length_block(values);
  length["all_generated"] = length_block(all_lengths);
  summary["length_stats"] = length;

  if (!detection.empty()) {
    json det = json::object();
    for (const auto& [category, row] : bench::detection_rate(detection)) {
      det[category] = {{"injected", row.injected}, {"detected", row.detected}, {"rate_pct", row.rate_text()}};
    }
    summary["detection"] = det;
  }
  return summary;
}

std::string scatter_svg(std::string_view metric, const std::vector<double>& x, const std::vector<double>& y) {
  constexpr double W = 480, H = 360, L = 56, R = 16, T = 24, B = 48;
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  double x0 = x.empty() ? 0.0 : *xmin_it, x1 = x.empty() ? 1.0 : *xmax_it;
  double y0 = y.empty() ? 1.0 : std::min(1.0, *ymin_it), y1 = y.empty() ? 5.0 : std::max(5.0, *ymax_it);
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  const auto f2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  svg += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + f2(L) + "\" y1=\"" + f2(H - B) + "\" x2=\"" + f2(W - R) + "\" y2=\"" + f2(H - B) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + f2(L) + "\" y1=\"" + f2(T) + "\" x2=\"" + f2(L) + "\" y2=\"" + f2(H - B) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + f2(L) + "\" y=\"" + f2(H - B + 16) + "\" font-size=\"11\">" + f2(x0) + "</text>\n";
  svg += "<text x=\"" + f2(W - R) + "\" y=\"" + f2(H - B + 16) + "\" font-size=\"11\" text-anchor=\"end\">" + f2(x1) +
         "</text>\n";
  svg += "<text x=\"" + f2(L - 6) + "\" y=\"" + f2(H - B) + "\" font-size=\"11\" text-anchor=\"end\">" + f2(y0) +
         "</text>\n";
  svg += "<text x=\"" + f2(L - 6) + "\" y=\"" + f2(T + 8) + "\" font-size=\"11\" text-anchor=\"end\">" + f2(y1) +
         "</text>\n";
  svg += "<text x=\"" + f2((L + W - R) / 2) + "\" y=\"" + f2(H - 12) + "\" font-size=\"13\" text-anchor=\"middle\">" +
         std::string(metric) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + f2((T + H - B) / 2) + "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         f2((T + H - B) / 2) + ")\">MOS</text>\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    svg += "<circle cx=\"" + f2(px(x[i])) + "\" cy=\"" + f2(py(y[i])) + "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  if (x.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx > 0.0) {
      const double slope = sxy / sxx;
      const double icept = my - slope * mx;
      svg += "<line x1=\"" + f2(px(x0)) + "\" y1=\"" + f2(py(icept + slope * x0)) + "\" x2=\"" + f2(px(x1)) +
             "\" y2=\"" + f2(py(icept + slope * x1)) + "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void emit_report(const RunManifest& run, const std::filesystem::path& out_dir, const ReportOptions& options) {
  const auto rows = rows_from_run(run);
  write_text(out_dir / "scores.csv", scores_csv(rows));
  write_text(out_dir / "summary.json", summary_json(run).dump(2) + "\n");
  if (!options.scatter) return;
  for (std::size_t m = 0; m < kMetricColumns.size(); ++m) {
    std::vector<double> x, y;
    for (const auto& row : rows) {
      if (row.status == "errored" || !row.metrics[m] || !row.mos_mean) continue;
      x.push_back(*row.metrics[m]);
      y.push_back(*row.mos_mean);
    }
    if (x.size() < 2) continue;
    write_text(out_dir / ("scatter_" + std::string(kMetricColumns[m]) + ".svg"), scatter_svg(kMetricColumns[m], x, y));
  }
}

}  // namespace emosura::report
