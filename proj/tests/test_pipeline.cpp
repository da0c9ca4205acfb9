#include <doctest.h>

#include <set>

#include "fixtures/reference_values.hpp"
#include "somqe/error.hpp"
#include "somqe/pipeline.hpp"
#include "somqe/synthgen.hpp"
#include "support.hpp"

using namespace somqe;
using somqe::test::TempDir;

namespace fx = somqe::fixtures;

namespace {

std::vector<std::string> labels_for(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(2000 + i));
  return out;
}

TrainingConfig quick_config() {
  TrainingConfig cfg;
  cfg.iterations = 2000;
  return cfg;
}

}  // namespace

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest(R"({
    "entries": [{"label": "1984", "path": "a.png"}, {"label": 1985, "path": "/abs/b.png"}],
    "roi": {"x": 1, "y": 2, "w": 3, "h": 4},
    "anchor": 0, "normalize": false, "align": 2})",
                                "/data");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].path == std::filesystem::path("/data/a.png"));
  CHECK(m.entries[1].label == "1985");
  CHECK(m.entries[1].path == std::filesystem::path("/abs/b.png"));
  CHECK(m.roi == RoiSpec{1, 2, 3, 4});
  CHECK(m.anchor_index() == 0);
  CHECK_FALSE(m.normalize);
  CHECK(m.align == 2);

  const auto d = parse_manifest(R"({"entries": [{"label": "a", "path": "x"},
                                                {"label": "b", "path": "y"}], "anchor": "last"})",
                                ".");
  CHECK(d.anchor_index() == 1);
  CHECK(d.normalize);

  CHECK_THROWS_AS(parse_manifest(R"({"entries": []})", "."), InputError);
  CHECK_THROWS_AS(parse_manifest(R"({"entries": [{"label": "a", "path": "x"},
                                                 {"label": "a", "path": "y"}]})", "."),
                  InputError);
  CHECK_THROWS_AS(parse_manifest(R"({"entries": [{"label": "a", "path": "x"}], "anchor": 3})", "."),
                  InputError);
  CHECK_THROWS_AS(parse_manifest(R"({"entries": [{"label": "a", "path": "x"}], "anchor": "first"})", "."),
                  InputError);
  CHECK_THROWS_AS(parse_manifest("not json", "."), InputError);
}

TEST_CASE("identical inputs give identical QE rows") {
  TempDir dir;
  std::mt19937 gen(10);
  save_png(somqe::test::random_image(24, 20, gen), dir / "same.png");
  SeriesManifest m;
  for (int i = 0; i < 5; ++i) m.entries.push_back({"f" + std::to_string(i), dir / "same.png"});
  const auto base = run_series(m, quick_config());
  REQUIRE(base.series.rows.size() == 5);
  for (const auto& row : base.series.rows) {
    CHECK(row.qe.value == base.series.rows[0].qe.value);
    CHECK(row.qe.n_samples == 480);
  }
  CHECK(base.series.rows[3].label == "f3");

  // Any anchor over identical normalized images gives the same rows.
  for (std::size_t a = 0; a < 5; ++a) {
    m.anchor = a;
    CHECK(format_qe_csv(run_series(m, quick_config()).series) == format_qe_csv(base.series));
  }
}

TEST_CASE("run_series applies the roi and reports the failing label") {
  TempDir dir;
  std::mt19937 gen(12);
  save_png(somqe::test::random_image(30, 30, gen), dir / "a.png");
  save_png(somqe::test::random_image(30, 30, gen), dir / "b.png");
  save_png(somqe::test::random_image(20, 30, gen), dir / "small.png");

  SeriesManifest m;
  m.entries = {{"a", dir / "a.png"}, {"b", dir / "b.png"}};
  m.roi = RoiSpec{5, 5, 10, 12};
  const auto run = run_series(m, quick_config());
  CHECK(run.series.rows[0].qe.n_samples == 120);

  m.entries.push_back({"gone", dir / "missing.png"});
  try {
    run_series(m, quick_config());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).rfind("gone: ", 0) == 0);
  }

  m.roi.reset();
  m.entries.back() = {"narrow", dir / "small.png"};
  try {
    run_series(m, quick_config());
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("narrow") != std::string::npos);
  }

  m.roi = RoiSpec{15, 0, 10, 10};
  CHECK_THROWS_AS(run_series(m, quick_config()), BoundsError);
}

TEST_CASE("degenerate normalization warns and continues") {
  std::vector<RasterImage> images{RasterImage(8, 8, Rgb{4, 4, 4}), RasterImage(8, 8, Rgb{9, 9, 9})};
  images[1].at(0, 0) = {200, 100, 50};
  std::vector<std::string> warnings;
  RunOptions opts;
  opts.warn = [&](std::string_view w) { warnings.emplace_back(w); };
  const auto run = analyze_images({"flat", "ok"}, images, {}, quick_config(), opts);
  CHECK(run.series.rows.size() == 2);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("flat") != std::string::npos);
}

TEST_CASE("synthetic extent and intensity series through the pipeline") {
  TrainingConfig cfg;

  const auto extent = gen_extent_series(ExtentSeriesSpec{});
  std::vector<RasterImage> imgs;
  for (const auto& s : extent) imgs.push_back(s.image);
  PreprocessOptions raw;
  raw.normalize = false;
  const auto e = analyze_images(labels_for(imgs.size()), imgs, raw, cfg);
  for (std::size_t i = 1; i < e.series.rows.size(); ++i) {
    CHECK(e.series.rows[i].qe.value > e.series.rows[i - 1].qe.value);
  }

  const auto intensity = gen_intensity_series(IntensitySeriesSpec{});
  imgs.clear();
  for (const auto& s : intensity) imgs.push_back(s.image);
  const auto n = analyze_images(labels_for(imgs.size()), imgs, {}, cfg);
  for (const auto& row : n.series.rows) CHECK(row.qe.value == n.series.rows[0].qe.value);
}

TEST_CASE("parallel scoring matches sequential scoring") {
  GrowthSeriesSpec spec;
  spec.image_size = 48;
  spec.frames = 9;
  std::vector<RasterImage> imgs;
  for (const auto& s : gen_growth_series(spec)) imgs.push_back(s.image);
  RunOptions seq;
  seq.workers = 1;
  RunOptions par;
  par.workers = 4;
  const auto a = analyze_images(labels_for(imgs.size()), imgs, {}, quick_config(), seq);
  const auto b = analyze_images(labels_for(imgs.size()), imgs, {}, quick_config(), par);
  CHECK(format_qe_csv(a.series) == format_qe_csv(b.series));
}

TEST_CASE("alignment inside the pipeline undoes a translation") {
  std::mt19937 gen(13);
  const auto base = somqe::test::random_image(32, 32, gen);
  // Shifted copy whose vacated border is white rather than black.
  auto moved = translate(base, {2, -1});
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (x < 2 || y == 31) moved.at(x, y) = {255, 255, 255};
    }
  }
  PreprocessOptions prep;
  prep.align = 3;
  prep.normalize = false;
  const auto run = analyze_images({"moved", "anchor"}, {moved, base}, prep, quick_config());
  CHECK(run.series.rows[0].qe.value ==
        quantization_error(run.model, translate(moved, {-2, 1})).value);
  CHECK(run.series.rows[0].qe.value != quantization_error(run.model, moved).value);
}

TEST_CASE("QE CSV format") {
  QeSeries s;
  s.rows = {{"1984", {0.123456789012345, 100}}, {"with,comma", {0.5, 7}}};
  const auto csv = format_qe_csv(s);
  CHECK(csv == "label,qe,n_samples\n1984,0.123456789012,100\n\"with,comma\",0.5,7\n");
  const auto table = parse_qe_csv(csv);
  CHECK(table.labels == std::vector<std::string>{"1984", "with,comma"});
  CHECK(table.qe[0] == 0.123456789012);
  CHECK_FALSE(table.x);

  CHECK_THROWS_AS(parse_qe_csv("label,value\na,1\n"), InputError);
  CHECK_THROWS_AS(parse_qe_csv("label,qe,n_samples\na,zz,1\n"), InputError);
  CHECK_THROWS_AS(parse_qe_csv("label,qe,n_samples\na,1,1\na,2,1\n"), InputError);
  CHECK_THROWS_AS(parse_qe_csv(""), InputError);
}

TEST_CASE("trend over QE tables") {
  const auto constant = parse_qe_csv("label,qe,n_samples\n1,0.2,9\n2,0.2,9\n3,0.2,9\n");
  const auto r = trend_of(constant);
  CHECK(r.slope == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(trend_verdict(r) == "no trend");

  CHECK_THROWS_AS(trend_of(parse_qe_csv("label,qe,n_samples\n1,0.2,9\n2,0.3,9\n")), InputError);

  try {
    trend_of(parse_qe_csv("label,qe,n_samples\njan,0.1,1\nfeb,0.2,1\nmar,0.4,1\n"));
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("'x' column") != std::string::npos);
  }
  const auto with_x = trend_of(parse_qe_csv("label,qe,n_samples,x\njan,0.1,1,1\nfeb,0.2,1,2\nmar,0.4,1,3\n"));
  CHECK(with_x.slope > 0.0);
  CHECK(trend_verdict(with_x) == "increase");
}

TEST_CASE("correlation joins on labels") {
  QeTable qe;
  ExternalSeries ext;
  for (std::size_t i = 0; i < fx::kQe.size(); ++i) {
    qe.labels.push_back(std::to_string(static_cast<int>(fx::kYears[i])));
    qe.qe.push_back(fx::kQe[i]);
    ext.labels.push_back(qe.labels.back());
    ext.values.push_back(fx::kExternal[i]);
  }
  const auto full = correlate_of(qe, ext);
  CHECK(full.result.n == 25);
  CHECK(full.unmatched_qe == 0);
  CHECK(somqe::test::relative_error(full.result.r, fx::kPearsonR) < 1e-9);

  ExternalSeries self{qe.labels, qe.qe};
  CHECK(correlate_of(qe, self).result.r == 1.0);

  ExternalSeries negative{qe.labels, {}};
  for (double v : qe.qe) negative.values.push_back(-4.0 * v + 2.0);
  CHECK(correlate_of(qe, negative).result.r == doctest::Approx(-1.0).epsilon(1e-12));

  // Partial overlap: drop three external rows, add two unknown ones.
  ExternalSeries partial{std::vector<std::string>(ext.labels.begin() + 3, ext.labels.end()),
                         std::vector<double>(ext.values.begin() + 3, ext.values.end())};
  partial.labels.push_back("1900");
  partial.values.push_back(1.0);
  partial.labels.push_back("1901");
  partial.values.push_back(2.0);
  const auto p = correlate_of(qe, partial);
  CHECK(p.matched == 22);
  CHECK(p.unmatched_qe == 3);
  CHECK(p.unmatched_external == 2);

  ExternalSeries disjoint{{"x", "y", "z"}, {1, 2, 3}};
  CHECK_THROWS_AS(correlate_of(qe, disjoint), InputError);
}

TEST_CASE("external CSV parsing") {
  const auto e = parse_external_csv("label,value\r\n1984, 12.5\r\n1985,13\r\n\r\n");
  CHECK(e.labels == std::vector<std::string>{"1984", "1985"});
  CHECK(e.values == std::vector<double>{12.5, 13.0});
  CHECK_THROWS_AS(parse_external_csv("label,qe\n1,2\n"), InputError);
  CHECK_THROWS_AS(parse_external_csv("label,value\n1,2,3\n"), InputError);
  CHECK_THROWS_AS(parse_external_csv("label,value\n1,2\n1,3\n"), InputError);
}

TEST_CASE("synth_to_directory") {
  TempDir dir;
  const auto out = synth_to_directory(R"({"kind": "extent"})", dir / "ext");
  CHECK(out.files.size() == 6);
  const auto manifest = load_manifest(out.manifest);
  CHECK(manifest.entries.size() == 6);
  CHECK(manifest.entries[0].label == "0.01");
  CHECK(load_image(manifest.entries[5].path).width() == 128);

  const auto before = read_text_file(out.files[3]);
  const auto again = synth_to_directory(R"({"kind": "extent"})", dir / "ext");
  CHECK(read_text_file(again.files[3]) == before);

  try {
    synth_to_directory(R"({"kind": "extent", "extents": [0.5, 1.2]})", dir / "bad");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("extents[1]") != std::string::npos);
  }
  CHECK_THROWS_AS(synth_to_directory(R"({"kind": "spiral"})", dir / "bad"), ValidationError);
  CHECK_THROWS_AS(synth_to_directory(R"({"kind": "extent", "image_size": "big"})", dir / "bad"),
                  ValidationError);
}
