#include "varic/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "varic/error.hpp"

namespace varic {

namespace {

std::int64_t cell_of(double x, double h) { return static_cast<std::int64_t>(std::floor(x / h)); }

}  // namespace

SpatialIndex::SpatialIndex(const Eigen::MatrixXd& points, double radius) : points_(points), radius_(radius) {
  if (!(radius > 0.0)) throw InvalidArgument("SpatialIndex: radius must be positive");
  const int n = dimension();
  const std::size_t count = size();

  std::vector<std::int64_t> coords(count * n);
  for (std::size_t i = 0; i < count; ++i) {
    for (int c = 0; c < n; ++c) coords[i * n + c] = cell_of(points_(c, i), radius_);
  }
  order_.resize(count);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords.begin() + a * n, coords.begin() + (a + 1) * n,
                                        coords.begin() + b * n, coords.begin() + (b + 1) * n);
  });

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = order_[k];
    const bool new_cell = k == 0 || !std::equal(coords.begin() + i * n, coords.begin() + (i + 1) * n,
                                                coords.begin() + order_[k - 1] * n);
    if (new_cell) {
      cell_start_.push_back(k);
      cell_coords_.insert(cell_coords_.end(), coords.begin() + i * n, coords.begin() + (i + 1) * n);
    }
  }
  cell_start_.push_back(count);
  const std::size_t cells = cell_start_.size() - 1;
  cell_lookup_.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) cell_lookup_.emplace(hash_cell(&cell_coords_[c * n]), c);

  // 3^n stencil, skipped when there are fewer occupied cells than stencil entries.
  std::size_t stencil_size = 1;
  for (int c = 0; c < n && stencil_size <= cells; ++c) stencil_size *= 3;
  if (stencil_size <= cells) {
    stencil_.resize(stencil_size * n);
    for (std::size_t s = 0; s < stencil_size; ++s) {
      std::size_t rest = s;
      for (int c = 0; c < n; ++c) {
        stencil_[s * n + c] = static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
    }
  }
}

std::uint64_t SpatialIndex::hash_cell(const std::int64_t* cell) const {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (int c = 0; c < dimension(); ++c) {
    h ^= static_cast<std::uint64_t>(cell[c]) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

void SpatialIndex::check_radius(double r) const {
  if (r > radius_) throw InvalidArgument("SpatialIndex: query radius exceeds build radius");
}

template <class Visit>
void SpatialIndex::visit_candidates(const double* center, Visit&& visit) const {
  const int n = dimension();
  const std::size_t cells = cell_start_.size() - 1;
  std::vector<std::int64_t> base(n), probe(n);
  for (int c = 0; c < n; ++c) base[c] = cell_of(center[c], radius_);

  auto visit_cell = [&](std::size_t cell) {
    for (std::size_t k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) visit(order_[k]);
  };

  if (stencil_.empty()) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      bool near = true;
      for (int c = 0; c < n && near; ++c) {
        const std::int64_t delta = cell_coords_[cell * n + c] - base[c];
        near = delta >= -1 && delta <= 1;
      }
      if (near) visit_cell(cell);
    }
    return;
  }
  const std::size_t entries = stencil_.size() / n;
  for (std::size_t s = 0; s < entries; ++s) {
    for (int c = 0; c < n; ++c) probe[c] = base[c] + stencil_[s * n + c];
    auto [lo, hi] = cell_lookup_.equal_range(hash_cell(probe.data()));
    for (auto it = lo; it != hi; ++it) {
      if (std::equal(probe.begin(), probe.end(), cell_coords_.begin() + it->second * n)) {
        visit_cell(it->second);
        break;
      }
    }
  }
}

std::vector<std::size_t> SpatialIndex::query_closed(const double* center, double r) const {
  check_radius(r);
  std::vector<std::size_t> out;
  if (size() == 0) return out;
  const int n = dimension();
  const double r2 = r * r;
  visit_candidates(center, [&](std::size_t j) {
    double d2 = 0.0;
    for (int c = 0; c < n; ++c) {
      const double diff = points_(c, j) - center[c];
      d2 += diff * diff;
    }
    if (d2 <= r2) out.push_back(j);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SpatialIndex::query_radius(const double* center, double r) const {
  auto out = query_closed(center, r);
  const int n = dimension();
  std::erase_if(out, [&](std::size_t j) {
    for (int c = 0; c < n; ++c) {
      if (points_(c, j) != center[c]) return false;
    }
    return true;
  });
  return out;
}

std::vector<std::size_t> SpatialIndex::query_radius(std::size_t i, double r) const {
  if (i >= size()) throw InvalidArgument("SpatialIndex: point index out of range");
  return query_radius(points_.col(static_cast<Eigen::Index>(i)).data(), r);
}

}  // namespace varic
