#pragma once

// Report artifacts for a scoring run: scores.csv, summary.json and
// scatter_<metric>.svg plots against MOS.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emosura/pipeline.hpp"

namespace emosura::report {

inline constexpr std::array<std::string_view, 8> kMetricColumns = {
    "s_p", "s_r", "s_f", "s_f_prime", "final", "bleu4", "rouge_l", "cider_d"};
inline constexpr int kDecimals = 4;

struct ScoreRow {
  std::string sample_id;
  std::string system_id;
  std::string status = "scored";
  std::array<std::optional<double>, kMetricColumns.size()> metrics{};
  std::optional<double> mos_mean;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class JoinMismatch : public Error {
 public:
  JoinMismatch(const std::string& what, std::vector<std::string> ids) : Error(what), unmatched(std::move(ids)) {}
  std::vector<std::string> unmatched;
};

double round_report(double v);

std::vector<ScoreRow> rows_from_run(const RunManifest& run);
std::string scores_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> parse_scores_csv(std::string_view text);

/// Replaces mos_mean on every row from a MOS CSV with columns sample_id,
/// optional system_id, and mos (one rating or mean per line; repeated keys
/// are averaged). Throws JoinMismatch naming ids present on only one side.
void join_mos(std::vector<ScoreRow>& rows, std::string_view mos_csv);

/// Per-metric pcc / pcc_p / kendall_tau / spearman_rho / samplewise_tau
/// against MOS. Undefined cells are "n/a". Empty object when no row has MOS.
json correlation_block(const std::vector<ScoreRow>& rows);

json summary_json(const RunManifest& run);
json summary_from_rows(const std::vector<ScoreRow>& rows);

/// Scatter of metric (x) against MOS (y) with a least-squares trend line.
std::string scatter_svg(std::string_view metric, const std::vector<double>& x, const std::vector<double>& y);

struct ReportOptions {
  bool scatter = true;
};

/// Writes scores.csv, summary.json and (when MOS is present) scatter SVGs.
void emit_report(const RunManifest& run, const std::filesystem::path& out_dir, const ReportOptions& options = {});

void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace emosura::report
