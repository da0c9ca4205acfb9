#include "somqe/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <regex>

#include <CLI11.hpp>

#include "somqe/error.hpp"
#include "somqe/pipeline.hpp"

namespace somqe::cli {

namespace {

TrainingConfig parse_grid(const std::string& grid, TrainingConfig cfg) {
  static const std::regex pattern(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(grid, m, pattern)) {
    throw ConfigError("--grid expects RxC, e.g. 4x4; got '" + grid + "'");
  }
  cfg.grid_rows = std::stoi(m[1]);
  cfg.grid_cols = std::stoi(m[2]);
  return cfg;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Change detection in image time series from SOM quantization error"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic image series");
  std::string synth_spec, synth_dir;
  synth->add_option("spec", synth_spec, "Series spec JSON")->required();
  synth->add_option("outdir", synth_dir, "Output directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Train on the anchor image and score the series");
  std::string manifest_path, grid = "4x4", qe_out, model_out;
  TrainingConfig cfg;
  bool no_normalize = false;
  std::optional<int> align;
  analyze->add_option("manifest", manifest_path, "Series manifest JSON")->required();
  analyze->add_option("--grid", grid, "SOM grid as RxC")->capture_default_str();
  analyze->add_option("--sigma", cfg.sigma0, "Initial neighborhood radius")->capture_default_str();
  analyze->add_option("--alpha", cfg.alpha0, "Initial learning rate")->capture_default_str();
  analyze->add_option("--iters", cfg.iterations, "Training iterations")->capture_default_str();
  analyze->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  analyze->add_flag("--no-normalize", no_normalize, "Skip contrast normalization");
  analyze->add_option("--align", align, "Integer alignment search radius in px");
  analyze->add_option("--out", qe_out, "QE CSV path (default: stdout)");
  analyze->add_option("--model", model_out, "Write the trained model JSON here");

  auto* trend = app.add_subcommand("trend", "Linear trend of QE over numeric labels");
  std::string trend_csv;
  bool trend_as_json = false;
  trend->add_option("qe_csv", trend_csv, "QE CSV")->required();
  trend->add_flag("--json", trend_as_json, "Print JSON");

  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of QE with an external series");
  std::string corr_qe, corr_ext;
  bool corr_as_json = false;
  correlate->add_option("qe_csv", corr_qe, "QE CSV")->required();
  correlate->add_option("external_csv", corr_ext, "External CSV (label,value)")->required();
  correlate->add_flag("--json", corr_as_json, "Print JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*synth) {
      const auto result = synth_to_directory(read_text_file(synth_spec), synth_dir);
      err << "wrote " << result.files.size() << " images and " << result.manifest.string() << "\n";
    } else if (*analyze) {
      cfg = parse_grid(grid, cfg);
      cfg.validate();
      SeriesManifest manifest = load_manifest(manifest_path);
      if (no_normalize) manifest.normalize = false;
      if (align) manifest.align = *align;
      RunOptions options;
      options.warn = [&err](std::string_view msg) { err << "warning: " << msg << "\n"; };
      const SeriesRun run = run_series(manifest, cfg, options);
      const std::string csv = format_qe_csv(run.series);
      if (qe_out.empty()) {
        out << csv;
      } else {
        write_text_file(qe_out, csv);
      }
      if (!model_out.empty()) {
        write_text_file(model_out, lattice_to_json(run.model));
      }
    } else if (*trend) {
      const auto result = trend_of(parse_qe_csv(read_text_file(trend_csv)));
      if (trend_as_json) {
        out << trend_json(result);
      } else {
        out << trend_verdict(result) << ": slope " << fixed(result.slope, 6) << ", R^2 "
            << fixed(result.r_squared, 4) << ", t(" << result.df << ") = "
            << fixed(result.t_stat, 4) << ", p = " << fixed(result.p_value, 4) << " (n = "
            << result.n << ")\n";
      }
    } else if (*correlate) {
      const auto report = correlate_of(parse_qe_csv(read_text_file(corr_qe)),
                                       parse_external_csv(read_text_file(corr_ext)));
      if (report.unmatched_qe || report.unmatched_external) {
        err << "warning: " << report.unmatched_qe << " QE label(s) and "
            << report.unmatched_external << " external label(s) had no match\n";
      }
      if (corr_as_json) {
        out << correlation_json(report);
      } else {
        out << "r = " << fixed(report.result.r, 6) << ", p = " << fixed(report.result.p_value, 4)
            << " (n = " << report.result.n << ")\n";
      }
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}

}  // namespace somqe::cli
