#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asd/density.hpp"

namespace asd {

/// Static 2-d tree over a point set, answering k-nearest-neighbour queries
/// for members of the set (the query point itself is excluded by index,
/// so coincident duplicates still count as neighbours).
class KdTree2 {
 public:
  explicit KdTree2(std::span<const Point> points);

  struct Neighbor {
    std::size_t index;
    double distance_sq;
  };

  /// Up to k nearest other points of member `query`, closest first.
  std::vector<Neighbor> nearest_others(std::size_t query, std::size_t k) const;

 private:
  struct Node {
    std::size_t point;
    int axis;
    std::ptrdiff_t left = -1;
    std::ptrdiff_t right = -1;
  };

  std::ptrdiff_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);

  std::vector<Point> points_;
  std::vector<Node> nodes_;
  std::ptrdiff_t root_ = -1;
};

}  // namespace asd
