#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace radtrack {

/// Geometry of a down-sampled class heatmap.
struct HeatmapConfig {
  int image_width = 800;
  int image_height = 448;
  int downsample = 4;
  int num_classes = 1;

  void validate() const;
  int grid_width() const { return image_width / downsample; }
  int grid_height() const { return image_height / downsample; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(grid_width()) * grid_height() * num_classes;
  }
  bool operator==(const HeatmapConfig&) const = default;
};

struct GaussianCenter;

struct GridCell {
  int col = 0;
  int row = 0;
  bool operator==(const GridCell&) const = default;
};

/// Dense (W/R) x (H/R) x C grid with every value in [0, 1].
///
/// Storage is class-major, then row-major: index = (cls * rows + row) * cols + col.
class Heatmap {
 public:
  explicit Heatmap(const HeatmapConfig& cfg);

  const HeatmapConfig& config() const { return cfg_; }
  double at(GridCell cell, int cls) const { return values_[index(cell, cls)]; }
  /// Throws InputError for values outside [0, 1] or non-finite.
  void set(GridCell cell, int cls, double value);
  std::span<const double> values() const { return values_; }
  bool contains(GridCell cell, int cls) const;

 private:
  friend Heatmap render_gaussian(std::span<const GaussianCenter>, const HeatmapConfig&);
  std::size_t index(GridCell cell, int cls) const {
    return (static_cast<std::size_t>(cls) * cfg_.grid_height() + cell.row) * cfg_.grid_width() +
           cell.col;
  }

  HeatmapConfig cfg_;
  std::vector<double> values_;
};

struct GaussianCenter {
  GridCell cell;
  int cls = 0;
  double sigma = 1.0;
};

/// Gaussian peaks exp(-|q-p|^2 / 2 sigma^2), combined per class by element-wise max.
Heatmap render_gaussian(std::span<const GaussianCenter> centers, const HeatmapConfig& cfg);

struct Peak {
  GridCell cell;
  int cls = 0;
  double score = 0.0;
};

/// Cells >= threshold that dominate their window x window neighbourhood in
/// their class channel. Equal values are resolved in favour of the lower row,
/// then the lower column. Sorted by descending score.
std::vector<Peak> extract_peaks(const Heatmap& hm, double threshold, int window);

struct FocalParams {
  double alpha = 2.0;
  double beta = 4.0;
};

inline constexpr double kFocalEpsilon = 1e-7;

/// Penalty-reduced pixel-wise focal loss, normalized by the object count and
/// returned with a non-negative sign. Predictions are clamped to
/// [kFocalEpsilon, 1 - kFocalEpsilon]; ground-truth cells equal to 1 are positives.
double focal_loss(const Heatmap& pred, const Heatmap& gt, const FocalParams& params,
                  int num_objects);

}  // namespace radtrack
