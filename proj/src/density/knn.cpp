#include "asd/knn.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace asd {

namespace {

double coord(const Point& p, int axis) { return axis == 0 ? p.x : p.y; }

double dist_sq(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct Farther {
  bool operator()(const KdTree2::Neighbor& a, const KdTree2::Neighbor& b) const {
    return a.distance_sq != b.distance_sq ? a.distance_sq < b.distance_sq : a.index < b.index;
  }
};

}  // namespace

KdTree2::KdTree2(std::span<const Point> points) : points_(points.begin(), points.end()) {
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::ptrdiff_t KdTree2::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 2;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t a, std::size_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca != cb ? ca < cb : a < b;
                   });
  const auto self = static_cast<std::ptrdiff_t>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const auto left = build(idx, lo, mid, depth + 1);
  const auto right = build(idx, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

std::vector<KdTree2::Neighbor> KdTree2::nearest_others(std::size_t query, std::size_t k) const {
  std::priority_queue<Neighbor, std::vector<Neighbor>, Farther> best;
  if (k == 0) return {};
  const Point& q = points_.at(query);

  // Iterative descent with an explicit stack of (node, lower bound on distance).
  std::vector<std::pair<std::ptrdiff_t, double>> stack;
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    auto [ni, bound] = stack.back();
    stack.pop_back();
    if (ni < 0) continue;
    if (best.size() == k && bound > best.top().distance_sq) continue;
    const Node& n = nodes_[static_cast<std::size_t>(ni)];
    if (n.point != query) {
      const Neighbor cand{n.point, dist_sq(q, points_[n.point])};
      if (best.size() < k) {
        best.push(cand);
      } else if (Farther{}(cand, best.top())) {
        best.pop();
        best.push(cand);
      }
    }
    const double diff = coord(q, n.axis) - coord(points_[n.point], n.axis);
    const auto near = diff < 0 ? n.left : n.right;
    const auto far = diff < 0 ? n.right : n.left;
    // far side pushed first so the near side is explored first
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }

  std::vector<Neighbor> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace asd
