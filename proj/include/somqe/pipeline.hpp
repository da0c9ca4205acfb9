#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "somqe/image.hpp"
#include "somqe/som.hpp"
#include "somqe/stats.hpp"

namespace somqe {

struct SeriesEntry {
  std::string label;
  std::filesystem::path path;
};

struct SeriesManifest {
  std::vector<SeriesEntry> entries;
  std::optional<RoiSpec> roi;
  std::optional<std::size_t> anchor;  // nullopt selects the last entry
  bool normalize = true;
  std::optional<int> align;

  void validate() const;
  std::size_t anchor_index() const;
};

// Relative entry paths are resolved against `base_dir`.
SeriesManifest parse_manifest(const std::string& json_text,
                              const std::filesystem::path& base_dir);
SeriesManifest load_manifest(const std::filesystem::path& path);

struct QeRow {
  std::string label;
  QeValue qe;
};

struct QeSeries {
  std::vector<QeRow> rows;
  std::string model_ref;
  TrainingConfig config;
};

struct SeriesRun {
  QeSeries series;
  SomLattice model;
};

using WarningSink = std::function<void(std::string_view)>;

struct RunOptions {
  WarningSink warn;        // defaults to stderr
  unsigned workers = 0;    // 0 picks hardware concurrency
};

struct PreprocessOptions {
  std::optional<std::size_t> anchor;
  bool normalize = true;
  std::optional<int> align;
};

/// Align, normalize, train on the anchor, then score every image against that
/// one model. Results keep input order.
SeriesRun analyze_images(const std::vector<std::string>& labels,
                         std::vector<RasterImage> images,
                         const PreprocessOptions& prep,
                         const TrainingConfig& config,
                         const RunOptions& options = {});

/// Loads and crops the manifest's images, then runs analyze_images. Any load
/// or shape failure is rethrown with the offending label prefixed.
SeriesRun run_series(const SeriesManifest& manifest,
                     const TrainingConfig& config,
                     const RunOptions& options = {});

// QE CSV: header "label,qe,n_samples"; qe with 12 significant digits.
std::string format_qe_csv(const QeSeries& series);

struct QeTable {
  std::vector<std::string> labels;
  std::vector<double> qe;
  std::optional<std::vector<double>> x;  // optional explicit "x" column
};

QeTable parse_qe_csv(const std::string& text);

struct ExternalSeries {
  std::vector<std::string> labels;
  std::vector<double> values;
};

// External CSV: header "label,value".
ExternalSeries parse_external_csv(const std::string& text);

/// x comes from the "x" column when present, else from numeric labels.
stats::TrendResult trend_of(const QeTable& table);

std::string trend_verdict(const stats::TrendResult& result);

struct CorrelationReport {
  stats::CorrelationResult result;
  std::size_t matched = 0;
  std::size_t unmatched_qe = 0;
  std::size_t unmatched_external = 0;
};

/// Inner join on exact label match, then Pearson on the matched pairs.
CorrelationReport correlate_of(const QeTable& qe, const ExternalSeries& external);

std::string trend_json(const stats::TrendResult& result);
std::string correlation_json(const CorrelationReport& report);

// Synthetic series from a JSON spec; see README for the schema.
struct SynthOutput {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

SynthOutput synth_to_directory(const std::string& spec_json,
                               const std::filesystem::path& out_dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace somqe
