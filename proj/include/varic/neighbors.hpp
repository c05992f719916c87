#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace varic {

/// Fixed-radius neighbor search on a uniform grid whose cell size is the
/// build radius.
///
/// The index keeps its own copy of the points and is immutable after
/// construction, so concurrent queries are safe. A point x_j is within r of
/// x when sum_c (x_j[c] - x[c])^2 <= r * r.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(const Eigen::MatrixXd& points, double radius);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  int dimension() const { return static_cast<int>(points_.rows()); }
  double radius() const { return radius_; }
  const Eigen::MatrixXd& points() const { return points_; }

  /// Indices j with 0 < |x_j - x_i| <= r, ascending.
  std::vector<std::size_t> query_radius(std::size_t i, double r) const;
  /// Indices j with 0 < |x_j - center| <= r, ascending.
  std::vector<std::size_t> query_radius(const double* center, double r) const;

  /// Every index with |x_j - center| <= r (zero distance included), ascending.
  std::vector<std::size_t> query_closed(const double* center, double r) const;

 private:
  template <class Visit>
  void visit_candidates(const double* center, Visit&& visit) const;
  void check_radius(double r) const;
  std::uint64_t hash_cell(const std::int64_t* cell) const;

  Eigen::MatrixXd points_;
  double radius_ = 0.0;
  std::vector<std::int64_t> cell_coords_;  // n per cell
  std::vector<std::size_t> cell_start_;    // CSR offsets into order_
  std::vector<std::size_t> order_;         // point indices grouped by cell, ascending within a cell
  std::unordered_multimap<std::uint64_t, std::size_t> cell_lookup_;
  std::vector<std::int64_t> stencil_;      // 3^n offsets, n per entry
};

}  // namespace varic
