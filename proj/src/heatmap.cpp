#include "radtrack/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "radtrack/error.hpp"

namespace radtrack {

void HeatmapConfig::validate() const {
  if (image_width <= 0 || image_height <= 0) throw ConfigError("heatmap image size must be positive");
  if (downsample <= 0) throw ConfigError("heatmap downsample must be positive");
  if (image_width % downsample != 0 || image_height % downsample != 0)
    throw ConfigError("image size must be divisible by the downsample factor");
  if (num_classes < 1) throw ConfigError("heatmap needs at least one class");
}

Heatmap::Heatmap(const HeatmapConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  values_.assign(cfg_.cell_count(), 0.0);
}

bool Heatmap::contains(GridCell cell, int cls) const {
  return cell.col >= 0 && cell.col < cfg_.grid_width() && cell.row >= 0 &&
         cell.row < cfg_.grid_height() && cls >= 0 && cls < cfg_.num_classes;
}

void Heatmap::set(GridCell cell, int cls, double value) {
  if (!contains(cell, cls)) throw InputError("heatmap cell out of range");
  if (!std::isfinite(value) || value < 0.0 || value > 1.0)
    throw InputError("heatmap values must lie in [0, 1]");
  values_[index(cell, cls)] = value;
}

Heatmap render_gaussian(std::span<const GaussianCenter> centers, const HeatmapConfig& cfg) {
  Heatmap hm(cfg);
  for (const auto& c : centers) {
    if (!hm.contains(c.cell, c.cls)) throw InputError("gaussian center outside the heatmap grid");
    if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) throw InputError("gaussian sigma must be positive");
  }
  const int cols = cfg.grid_width();
  const int rows = cfg.grid_height();
  for (const auto& c : centers) {
    const double denom = 2.0 * c.sigma * c.sigma;
    for (int row = 0; row < rows; ++row) {
      const double dy = row - c.cell.row;
      for (int col = 0; col < cols; ++col) {
        const double dx = col - c.cell.col;
        const double g = std::exp(-(dx * dx + dy * dy) / denom);
        double& v = hm.values_[hm.index({col, row}, c.cls)];
        v = std::max(v, g);
      }
    }
  }
  return hm;
}

namespace {

// (value desc, row asc, col asc) ordering: true when `a` beats `b`.
bool dominates(double va, GridCell a, double vb, GridCell b) {
  if (va != vb) return va > vb;
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

}  // namespace

std::vector<Peak> extract_peaks(const Heatmap& hm, double threshold, int window) {
  if (window < 1 || window % 2 == 0) throw InputError("peak window must be a positive odd integer");
  const auto& cfg = hm.config();
  const int half = window / 2;
  const int cols = cfg.grid_width();
  const int rows = cfg.grid_height();

  std::vector<Peak> peaks;
  for (int cls = 0; cls < cfg.num_classes; ++cls) {
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        const GridCell cell{col, row};
        const double v = hm.at(cell, cls);
        if (v < threshold) continue;
        bool is_peak = true;
        for (int r = std::max(0, row - half); is_peak && r <= std::min(rows - 1, row + half); ++r) {
          for (int c = std::max(0, col - half); c <= std::min(cols - 1, col + half); ++c) {
            if (r == row && c == col) continue;
            if (!dominates(v, cell, hm.at({c, r}, cls), {c, r})) {
              is_peak = false;
              break;
            }
          }
        }
        if (is_peak) peaks.push_back({cell, cls, v});
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.cell.row != b.cell.row) return a.cell.row < b.cell.row;
    return a.cell.col < b.cell.col;
  });
  return peaks;
}

double focal_loss(const Heatmap& pred, const Heatmap& gt, const FocalParams& params,
                  int num_objects) {
  if (!(pred.config() == gt.config())) throw InputError("focal loss: heatmap configs differ");
  if (num_objects < 1) throw InputError("focal loss: object count must be positive");
  if (!(params.alpha > 0.0) || !(params.beta > 0.0))
    throw ConfigError("focal loss exponents must be positive");

  // Neumaier summation in storage order (class-major, row-major).
  double sum = 0.0;
  double comp = 0.0;
  const auto p = pred.values();
  const auto y = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double yh = std::clamp(p[i], kFocalEpsilon, 1.0 - kFocalEpsilon);
    double term;
    if (y[i] == 1.0) {
      term = std::pow(1.0 - yh, params.alpha) * std::log(yh);
    } else {
      term = std::pow(1.0 - y[i], params.beta) * std::pow(yh, params.alpha) * std::log1p(-yh);
    }
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return -(sum + comp) / num_objects;
}

}  // namespace radtrack
