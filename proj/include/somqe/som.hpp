#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "somqe/image.hpp"

namespace somqe {

/// RGB scaled to [0, 1] by dividing 8-bit channels by 255.
using FeatureVector = std::array<double, 3>;

FeatureVector to_feature(const Rgb& px);

double distance(const FeatureVector& a, const FeatureVector& b);

struct TrainingConfig {
  int grid_rows = 4;
  int grid_cols = 4;
  double sigma0 = 1.2;
  double alpha0 = 0.2;
  long iterations = 10000;
  std::uint64_t seed = 42;

  // Throws ConfigError listing every violated constraint.
  void validate() const;

  bool operator==(const TrainingConfig&) const = default;
};

// Asymptotic decay shared by the learning rate and the neighborhood radius:
// value0 / (1 + 2t/T).
double decayed(double value0, long t, long total_iterations);

struct UnitIndex {
  int row = 0;
  int col = 0;

  bool operator==(const UnitIndex&) const = default;
};

struct BmuResult {
  UnitIndex unit;
  double distance = 0.0;
};

struct QeValue {
  double value = 0.0;
  std::size_t n_samples = 0;
};

class SomLattice {
 public:
  SomLattice(TrainingConfig config, std::vector<FeatureVector> weights,
             bool trained);

  const TrainingConfig& config() const { return config_; }
  const std::vector<FeatureVector>& weights() const { return weights_; }
  bool trained() const { return trained_; }

  int rows() const { return config_.grid_rows; }
  int cols() const { return config_.grid_cols; }

  const FeatureVector& weight(UnitIndex u) const {
    return weights_[static_cast<std::size_t>(u.row * config_.grid_cols + u.col)];
  }

  bool operator==(const SomLattice&) const = default;

 private:
  friend SomLattice train(SomLattice, const RasterImage&, const TrainingConfig&);

  TrainingConfig config_;
  std::vector<FeatureVector> weights_;
  bool trained_ = false;
};

/// Untrained lattice with weights i.i.d. uniform over [0,1]^3, drawn from
/// mt19937_64 seeded with config.seed.
SomLattice init_lattice(const TrainingConfig& config);

/// Closest unit by Euclidean distance; ties go to the smallest row-major index.
BmuResult best_matching_unit(const SomLattice& lattice,
                             const FeatureVector& sample);

/// Online Kohonen training.
///
/// Each of config.iterations steps draws one pixel uniformly (with
/// replacement) from `training_image`, finds its BMU c and moves every unit
/// i by alpha(t) * h(c, i, t) * (x - w_i), where h is a Gaussian of the
/// Euclidean lattice distance with radius sigma(t). Both alpha and sigma
/// decay as value0 / (1 + 2t/T). Pixel draws use a stream derived from
/// config.seed, separate from the initialization stream.
SomLattice train(SomLattice lattice, const RasterImage& training_image,
                 const TrainingConfig& config);

/// Mean Euclidean distance of every pixel to its BMU weight.
QeValue quantization_error(const SomLattice& lattice, const RasterImage& image);

// Model file: {format_version, grid_rows, grid_cols, sigma0, alpha0,
// iterations, seed, weights: [[r,g,b], ...] row-major}.
inline constexpr int kModelFormatVersion = 1;

std::string lattice_to_json(const SomLattice& lattice);
SomLattice lattice_from_json(const std::string& text);

}  // namespace somqe
