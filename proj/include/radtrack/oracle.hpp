#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "radtrack/association.hpp"
#include "radtrack/metrics.hpp"

namespace radtrack::oracle {

/// Dense detections x tracks matrix; +inf marks a forbidden pair.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  double total_cost = 0.0;
  /// (row, col), ascending row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t size() const { return pairs.size(); }
};

/// Sum of the selected entries in ascending row order.
double assignment_cost(const CostMatrix& m, std::span<const std::pair<std::size_t, std::size_t>> pairs);

inline constexpr std::size_t kExhaustiveLimit = 10;

/// Exhaustive search: among injective matchings over finite entries, the
/// largest ones, and among those the cheapest. Unmatched rows/columns cost
/// nothing. Throws InputError above kExhaustiveLimit rows or columns.
Assignment optimal_assignment(const CostMatrix& m);

/// Exhaustive cheapest matching with exactly `k` pairs; nullopt if none exists.
std::optional<Assignment> optimal_assignment_of_size(const CostMatrix& m, std::size_t k);

/// Polynomial counterpart of optimal_assignment (successive shortest paths).
Assignment min_cost_matching(const CostMatrix& m);

/// Polynomial counterpart of optimal_assignment_of_size.
std::optional<Assignment> min_cost_matching_of_size(const CostMatrix& m, std::size_t k);

/// pairwise_cost for gated pairs, +inf outside the gate.
CostMatrix build_cost_matrix(std::span<const Detection> dets, std::span<const Track> tracks,
                             const CostWeights& w);

/// Greedy result expressed as (det index, track column) pairs over `tracks`.
std::vector<std::pair<std::size_t, std::size_t>> greedy_pairs(const AssociationResult& result,
                                                              std::span<const Track> tracks);

inline constexpr std::size_t kRecountMaxObjects = 4;
inline constexpr std::size_t kRecountMaxFrames = 10;
inline constexpr std::size_t kRecountMaxPredsPerFrame = 8;

/// Independent recount of IDS/FP/FN by enumerating every per-frame matching
/// and selecting the one the matching protocol prescribes. Throws InputError
/// for instances above the size limits.
metrics::ErrorCounts recount_metrics(std::span<const metrics::PredFrame> preds,
                                     std::span<const metrics::GroundTruthFrame> gt,
                                     double confidence_floor, double dist_threshold);

}  // namespace radtrack::oracle
