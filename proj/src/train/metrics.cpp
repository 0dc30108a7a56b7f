#include "asd/metrics.hpp"

#include <cmath>

#include "asd/errors.hpp"

namespace asd {

CountMetrics count_metrics(std::span<const double> predicted, std::span<const double> ground_truth) {
  if (predicted.empty()) throw ArgumentError("count metrics need at least one image");
  if (predicted.size() != ground_truth.size()) throw ArgumentError("count metrics: prediction/ground-truth length mismatch");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - ground_truth[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const auto n = static_cast<double>(predicted.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

}  // namespace asd
