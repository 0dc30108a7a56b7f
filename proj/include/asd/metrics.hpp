#pragma once

#include <span>

namespace asd {

/// Count errors in the crowd-counting convention: `mse` is the ROOT of the
/// mean squared count error.
struct CountMetrics {
  double mae = 0.0;
  double mse = 0.0;
};

/// Throws ArgumentError on empty or mismatched inputs.
CountMetrics count_metrics(std::span<const double> predicted, std::span<const double> ground_truth);

}  // namespace asd
