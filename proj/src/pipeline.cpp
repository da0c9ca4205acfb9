#include "somqe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "somqe/error.hpp"
#include "somqe/synthgen.hpp"

namespace somqe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Rethrows the active somqe::Error with a prefix, keeping its category.
[[noreturn]] void rethrow_with_prefix(const std::string& prefix) {
  try {
    throw;
  } catch (const DecodeError& e) {
    throw DecodeError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const BoundsError& e) {
    throw BoundsError(prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  }
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Minimal RFC 4180 reader: comma separated, double-quoted fields allowed,
// no embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw InputError("CSV line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view name, std::string_view what) const {
    if (auto c = column(name)) return *c;
    throw InputError(std::string(what) + " CSV: missing column '" + std::string(name) + "'");
  }
};

CsvTable parse_csv(const std::string& text, std::string_view what) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InputError(std::string(what) + " CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) {
    throw InputError(std::string(what) + " CSV is empty");
  }
  return table;
}

double numeric_field(const CsvTable& t, std::size_t row, std::size_t col, std::string_view what) {
  const auto v = parse_double(t.rows[row][col]);
  if (!v || !std::isfinite(*v)) {
    throw InputError(std::string(what) + " CSV line " + std::to_string(t.line_numbers[row]) +
                     ": '" + t.header[col] + "' value '" + t.rows[row][col] +
                     "' is not a finite number");
  }
  return *v;
}

void require_unique(const std::vector<std::string>& labels, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw InputError(std::string(what) + ": duplicate label '" + l + "'");
    }
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n' || c == '\r') throw InputError("label contains a newline");
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

void default_warn(std::string_view msg) { std::cerr << "warning: " << msg << "\n"; }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void SeriesManifest::validate() const {
  if (entries.empty()) throw InputError("manifest has no entries");
  std::vector<std::string> labels;
  for (const auto& e : entries) labels.push_back(e.label);
  require_unique(labels, "manifest");
  if (anchor && *anchor >= entries.size()) {
    throw InputError("manifest anchor " + std::to_string(*anchor) + " out of range for " +
                     std::to_string(entries.size()) + " entries");
  }
  if (align && *align < 0) throw InputError("manifest align must be >= 0");
  if (roi && (roi->x < 0 || roi->y < 0 || roi->w <= 0 || roi->h <= 0)) {
    throw InputError("manifest roi needs x, y >= 0 and w, h > 0");
  }
}

std::size_t SeriesManifest::anchor_index() const {
  return anchor.value_or(entries.size() - 1);
}

SeriesManifest parse_manifest(const std::string& json_text,
                              const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest JSON: ") + e.what());
  }
  SeriesManifest m;
  try {
    for (const auto& e : doc.at("entries")) {
      std::filesystem::path p = e.at("path").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      const auto& label = e.at("label");
      m.entries.push_back({label.is_string() ? label.get<std::string>() : label.dump(), p});
    }
    if (doc.contains("roi") && !doc["roi"].is_null()) {
      const auto& r = doc["roi"];
      m.roi = RoiSpec{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(),
                      r.at("h").get<int>()};
    }
    if (doc.contains("anchor") && !doc["anchor"].is_null()) {
      const auto& a = doc["anchor"];
      if (a.is_string()) {
        if (a.get<std::string>() != "last") {
          throw InputError("manifest anchor must be \"last\" or an index");
        }
      } else {
        const auto idx = a.get<long long>();
        if (idx < 0) throw InputError("manifest anchor must be non-negative");
        m.anchor = static_cast<std::size_t>(idx);
      }
    }
    m.normalize = doc.value("normalize", true);
    if (doc.contains("align") && !doc["align"].is_null()) {
      m.align = doc["align"].get<int>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

SeriesManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

SeriesRun analyze_images(const std::vector<std::string>& labels,
                         std::vector<RasterImage> images,
                         const PreprocessOptions& prep,
                         const TrainingConfig& config,
                         const RunOptions& options) {
  config.validate();
  const WarningSink warn = options.warn ? options.warn : WarningSink(default_warn);
  if (images.empty()) throw InputError("series is empty");
  if (labels.size() != images.size()) throw InputError("labels and images differ in count");
  const std::size_t anchor = prep.anchor.value_or(images.size() - 1);
  if (anchor >= images.size()) throw InputError("anchor index out of range");

  const RasterImage& first = images[anchor];
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].empty()) throw InputError(labels[i] + ": image is empty");
    if (images[i].width() != first.width() || images[i].height() != first.height()) {
      throw InputError(labels[i] + ": size " + std::to_string(images[i].width()) + "x" +
                       std::to_string(images[i].height()) + " differs from anchor '" + labels[anchor] + "' " +
                       std::to_string(first.width()) + "x" + std::to_string(first.height()));
    }
  }

  if (prep.align && *prep.align > 0) {
    const RasterImage reference = images[anchor];
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (i == anchor) continue;
      try {
        images[i] = align_translation(reference, images[i], *prep.align).image;
      } catch (const Error&) {
        rethrow_with_prefix(labels[i] + ": ");
      }
    }
  }

  if (prep.normalize) {
    for (std::size_t i = 0; i < images.size(); ++i) {
      auto normalized = contrast_normalize(images[i]);
      if (normalized.report.degenerate) {
        warn(labels[i] + ": constant channel during contrast normalization, mapped to zero");
      }
      images[i] = std::move(normalized.image);
    }
  }

  const SomLattice model = train(init_lattice(config), images[anchor], config);

  std::vector<QeValue> qe(images.size());
  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(images.size()));
  std::atomic<std::size_t> next{0};
  auto score = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      qe[i] = quantization_error(model, images[i]);
    }
  };
  if (workers == 1) {
    score();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          score();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = images.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SeriesRun run{QeSeries{}, model};
  run.series.config = config;
  run.series.model_ref = "anchor=" + labels[anchor] + ";seed=" + std::to_string(config.seed);
  for (std::size_t i = 0; i < images.size(); ++i) {
    run.series.rows.push_back({labels[i], qe[i]});
  }
  return run;
}

SeriesRun run_series(const SeriesManifest& manifest, const TrainingConfig& config,
                     const RunOptions& options) {
  manifest.validate();
  std::vector<std::string> labels;
  std::vector<RasterImage> images;
  for (const auto& entry : manifest.entries) {
    try {
      RasterImage img = load_image(entry.path);
      if (manifest.roi) img = crop_roi(img, *manifest.roi);
      images.push_back(std::move(img));
    } catch (const Error&) {
      rethrow_with_prefix(entry.label + ": ");
    }
    labels.push_back(entry.label);
  }
  PreprocessOptions prep;
  prep.anchor = manifest.anchor;
  prep.normalize = manifest.normalize;
  prep.align = manifest.align;
  return analyze_images(labels, std::move(images), prep, config, options);
}

std::string format_qe_csv(const QeSeries& series) {
  std::string out = "label,qe,n_samples\n";
  for (const auto& row : series.rows) {
    out += csv_escape(row.label);
    out += ',';
    out += format_g(row.qe.value, 12);
    out += ',';
    out += std::to_string(row.qe.n_samples);
    out += '\n';
  }
  return out;
}

QeTable parse_qe_csv(const std::string& text) {
  const CsvTable t = parse_csv(text, "QE");
  const auto label_col = t.require("label", "QE");
  const auto qe_col = t.require("qe", "QE");
  const auto x_col = t.column("x");
  QeTable out;
  if (x_col) out.x.emplace();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.labels.push_back(t.rows[r][label_col]);
    out.qe.push_back(numeric_field(t, r, qe_col, "QE"));
    if (x_col) out.x->push_back(numeric_field(t, r, *x_col, "QE"));
  }
  require_unique(out.labels, "QE CSV");
  return out;
}

ExternalSeries parse_external_csv(const std::string& text) {
  const CsvTable t = parse_csv(text, "external");
  const auto label_col = t.require("label", "external");
  const auto value_col = t.require("value", "external");
  ExternalSeries out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.labels.push_back(t.rows[r][label_col]);
    out.values.push_back(numeric_field(t, r, value_col, "external"));
  }
  require_unique(out.labels, "external CSV");
  return out;
}

stats::TrendResult trend_of(const QeTable& table) {
  if (table.qe.size() < 3) {
    throw InputError("trend needs at least 3 rows, got " + std::to_string(table.qe.size()));
  }
  std::vector<double> xs;
  if (table.x) {
    xs = *table.x;
  } else {
    for (const auto& label : table.labels) {
      const auto v = parse_double(trim(label));
      if (!v || !std::isfinite(*v)) {
        throw InputError("label '" + label +
                         "' is not numeric; add an explicit numeric 'x' column to the CSV");
      }
      xs.push_back(*v);
    }
  }
  return stats::linear_trend(xs, table.qe);
}

std::string trend_verdict(const stats::TrendResult& result) {
  if (result.slope > 0.0) return "increase";
  if (result.slope < 0.0) return "decrease";
  return "no trend";
}

CorrelationReport correlate_of(const QeTable& qe, const ExternalSeries& external) {
  std::unordered_map<std::string, double> lookup;
  for (std::size_t i = 0; i < external.labels.size(); ++i) {
    lookup.emplace(external.labels[i], external.values[i]);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < qe.labels.size(); ++i) {
    if (auto it = lookup.find(qe.labels[i]); it != lookup.end()) {
      xs.push_back(qe.qe[i]);
      ys.push_back(it->second);
    }
  }
  CorrelationReport report;
  report.matched = xs.size();
  report.unmatched_qe = qe.labels.size() - xs.size();
  report.unmatched_external = external.labels.size() - xs.size();
  if (xs.size() < 3) {
    throw InputError("correlation needs at least 3 matched labels, got " +
                     std::to_string(xs.size()));
  }
  report.result = stats::pearson(xs, ys);
  return report;
}

std::string trend_json(const stats::TrendResult& r) {
  ordered_json doc;
  doc["slope"] = r.slope;
  doc["intercept"] = r.intercept;
  doc["r_squared"] = r.r_squared;
  doc["t_stat"] = r.t_stat;  // infinite t (perfect fit) serializes as null
  doc["df"] = r.df;
  doc["p_value"] = r.p_value;
  doc["n"] = r.n;
  doc["verdict"] = trend_verdict(r);
  return doc.dump(2) + "\n";
}

std::string correlation_json(const CorrelationReport& report) {
  ordered_json doc;
  doc["r"] = report.result.r;
  doc["p_value"] = report.result.p_value;
  doc["n"] = report.result.n;
  doc["df"] = report.result.n - 2;
  doc["unmatched_qe"] = report.unmatched_qe;
  doc["unmatched_external"] = report.unmatched_external;
  return doc.dump(2) + "\n";
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("invalid synth spec\n  ") + key + ": wrong type");
  }
}

}  // namespace

SynthOutput synth_to_directory(const std::string& spec_json,
                               const std::filesystem::path& out_dir) {
  json doc;
  try {
    doc = json::parse(spec_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("synth spec must be a JSON object");
  std::string kind = "extent";
  read_field(doc, "kind", kind);

  std::vector<SynthImage> images;
  std::vector<std::string> labels;
  if (kind == "extent") {
    ExtentSeriesSpec spec;
    read_field(doc, "image_size", spec.image_size);
    read_field(doc, "background_level", spec.background_level);
    read_field(doc, "foreground_level", spec.foreground_level);
    read_field(doc, "extents", spec.extents);
    images = gen_extent_series(spec);
    for (const auto& img : images) labels.push_back(format_g(img.extent_requested, 12));
  } else if (kind == "intensity") {
    IntensitySeriesSpec spec;
    read_field(doc, "image_size", spec.image_size);
    read_field(doc, "background_level", spec.background_level);
    read_field(doc, "extent", spec.extent);
    read_field(doc, "foreground_levels", spec.foreground_levels);
    images = gen_intensity_series(spec);
    for (const auto& img : images) labels.push_back(std::to_string(img.foreground_level));
  } else if (kind == "growth") {
    GrowthSeriesSpec spec;
    long long label_start = 0;
    read_field(doc, "image_size", spec.image_size);
    read_field(doc, "background_level", spec.background_level);
    read_field(doc, "foreground_level", spec.foreground_level);
    read_field(doc, "extent_first", spec.extent_first);
    read_field(doc, "extent_last", spec.extent_last);
    read_field(doc, "frames", spec.frames);
    read_field(doc, "noise_amplitude", spec.noise_amplitude);
    read_field(doc, "seed", spec.seed);
    read_field(doc, "label_start", label_start);
    images = gen_growth_series(spec);
    for (std::size_t i = 0; i < images.size(); ++i) {
      labels.push_back(std::to_string(label_start + static_cast<long long>(i)));
    }
  } else {
    throw ValidationError("invalid synth spec\n  kind: must be extent, intensity or growth");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  SynthOutput out;
  ordered_json manifest;
  manifest["kind"] = kind;
  manifest["entries"] = ordered_json::array();
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "image_%03zu.png", i);
    const auto path = out_dir / name;
    save_png(images[i].image, path);
    out.files.push_back(path);
    ordered_json entry;
    entry["index"] = i;
    entry["label"] = labels[i];
    entry["path"] = name;
    entry["extent_requested"] = images[i].extent_requested;
    entry["extent_actual"] = images[i].extent_actual;
    entry["foreground_level"] = images[i].foreground_level;
    entry["background_level"] = images[i].background_level;
    manifest["entries"].push_back(std::move(entry));
  }
  manifest["anchor"] = "last";
  manifest["normalize"] = true;
  out.manifest = out_dir / "manifest.json";
  write_text_file(out.manifest, manifest.dump(2) + "\n");
  return out;
}

}  // namespace somqe
