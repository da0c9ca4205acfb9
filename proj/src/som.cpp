#include "somqe/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "somqe/error.hpp"
#include "somqe/rng.hpp"

namespace somqe {

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  const double d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

bool valid_feature(const FeatureVector& v) {
  for (double c : v) {
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) return false;
  }
  return true;
}

// Index and squared distance of the closest weight; strict < keeps the first
// (smallest row-major) unit on ties.
std::pair<std::size_t, double> nearest(const std::vector<FeatureVector>& weights,
                                       const FeatureVector& sample) {
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double sq = squared_distance(weights[i], sample);
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return {best, best_sq};
}

}  // namespace

FeatureVector to_feature(const Rgb& px) {
  return {px[0] / 255.0, px[1] / 255.0, px[2] / 255.0};
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  return std::sqrt(squared_distance(a, b));
}

void TrainingConfig::validate() const {
  std::ostringstream problems;
  if (grid_rows < 1) problems << " grid_rows must be >= 1;";
  if (grid_cols < 1) problems << " grid_cols must be >= 1;";
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) problems << " sigma0 must be > 0;";
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) problems << " alpha0 must be in (0, 1];";
  if (iterations < 1) problems << " iterations must be >= 1;";
  const std::string text = problems.str();
  if (!text.empty()) {
    throw ConfigError("invalid training config:" + text);
  }
}

double decayed(double value0, long t, long total_iterations) {
  return value0 / (1.0 + 2.0 * static_cast<double>(t) /
                             static_cast<double>(total_iterations));
}

SomLattice::SomLattice(TrainingConfig config, std::vector<FeatureVector> weights,
                       bool trained)
    : config_(config), weights_(std::move(weights)), trained_(trained) {
  config_.validate();
  const auto expected = static_cast<std::size_t>(config_.grid_rows) *
                        static_cast<std::size_t>(config_.grid_cols);
  if (weights_.size() != expected) {
    throw ConfigError("lattice has " + std::to_string(weights_.size()) +
                      " weights, expected " + std::to_string(expected));
  }
  for (const auto& w : weights_) {
    if (!valid_feature(w)) {
      throw ConfigError("lattice weight outside [0,1]^3");
    }
  }
}

SomLattice init_lattice(const TrainingConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<FeatureVector> weights(static_cast<std::size_t>(config.grid_rows) *
                                     static_cast<std::size_t>(config.grid_cols));
  for (auto& w : weights) {
    for (auto& c : w) c = rng.uniform01();
  }
  return SomLattice(config, std::move(weights), false);
}

BmuResult best_matching_unit(const SomLattice& lattice,
                             const FeatureVector& sample) {
  const auto [index, sq] = nearest(lattice.weights(), sample);
  const int cols = lattice.cols();
  return {{static_cast<int>(index) / cols, static_cast<int>(index) % cols},
          std::sqrt(sq)};
}

SomLattice train(SomLattice lattice, const RasterImage& training_image,
                 const TrainingConfig& config) {
  config.validate();
  if (training_image.empty()) {
    throw InputError("training image is empty");
  }
  if (config.grid_rows != lattice.rows() || config.grid_cols != lattice.cols()) {
    throw ConfigError("training config grid does not match the lattice");
  }

  const auto& pixels = training_image.pixels();
  auto& weights = lattice.weights_;
  const int rows = config.grid_rows;
  const int cols = config.grid_cols;
  const long total = config.iterations;

  Rng rng(mix_seed(config.seed));
  for (long t = 0; t < total; ++t) {
    const FeatureVector x = to_feature(pixels[rng.uniform_below(pixels.size())]);
    const auto [bmu, unused] = nearest(weights, x);
    (void)unused;
    const int bmu_row = static_cast<int>(bmu) / cols;
    const int bmu_col = static_cast<int>(bmu) % cols;

    const double alpha = decayed(config.alpha0, t, total);
    const double sigma = decayed(config.sigma0, t, total);
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double dr = r - bmu_row;
        const double dc = c - bmu_col;
        const double h = std::exp(-(dr * dr + dc * dc) * inv_two_sigma_sq);
        const double rate = alpha * h;
        auto& w = weights[static_cast<std::size_t>(r * cols + c)];
        for (int k = 0; k < 3; ++k) {
          w[k] += rate * (x[k] - w[k]);
        }
      }
    }
  }
  lattice.config_ = config;
  lattice.trained_ = true;
  return lattice;
}

QeValue quantization_error(const SomLattice& lattice, const RasterImage& image) {
  if (!lattice.trained()) {
    throw StateError("quantization error requires a trained lattice");
  }
  if (image.empty()) {
    throw InputError("image is empty");
  }
  // Accumulate per distinct color in ascending packed-color order, so the
  // result does not depend on pixel order and each BMU search runs once.
  std::vector<std::uint32_t> packed;
  packed.reserve(image.size());
  for (const auto& px : image.pixels()) {
    packed.push_back((std::uint32_t{px[0]} << 16) | (std::uint32_t{px[1]} << 8) | px[2]);
  }
  std::sort(packed.begin(), packed.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < packed.size();) {
    std::size_t j = i;
    while (j < packed.size() && packed[j] == packed[i]) ++j;
    const Rgb px{static_cast<std::uint8_t>(packed[i] >> 16),
                 static_cast<std::uint8_t>(packed[i] >> 8),
                 static_cast<std::uint8_t>(packed[i])};
    sum += static_cast<double>(j - i) * std::sqrt(nearest(lattice.weights(), to_feature(px)).second);
    i = j;
  }
  const double qe = sum / static_cast<double>(image.size());
  if (!std::isfinite(qe) || qe < 0.0 || qe > std::sqrt(3.0)) {
    throw InvariantError("quantization error out of range: " + std::to_string(qe));
  }
  return {qe, image.size()};
}

std::string lattice_to_json(const SomLattice& lattice) {
  const auto& cfg = lattice.config();
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["grid_rows"] = cfg.grid_rows;
  doc["grid_cols"] = cfg.grid_cols;
  doc["sigma0"] = cfg.sigma0;
  doc["alpha0"] = cfg.alpha0;
  doc["iterations"] = cfg.iterations;
  doc["seed"] = cfg.seed;
  doc["trained"] = lattice.trained();
  auto weights = nlohmann::ordered_json::array();
  for (const auto& w : lattice.weights()) {
    weights.push_back({w[0], w[1], w[2]});
  }
  doc["weights"] = std::move(weights);
  return doc.dump(2) + "\n";
}

SomLattice lattice_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("model JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DecodeError("unsupported model format_version " + std::to_string(version));
    }
    TrainingConfig cfg;
    cfg.grid_rows = doc.at("grid_rows").get<int>();
    cfg.grid_cols = doc.at("grid_cols").get<int>();
    cfg.sigma0 = doc.at("sigma0").get<double>();
    cfg.alpha0 = doc.at("alpha0").get<double>();
    cfg.iterations = doc.at("iterations").get<long>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    std::vector<FeatureVector> weights;
    for (const auto& w : doc.at("weights")) {
      if (w.size() != 3) throw DecodeError("model weight must have 3 components");
      weights.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
    }
    return SomLattice(cfg, std::move(weights), doc.value("trained", true));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("model JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw DecodeError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace somqe
