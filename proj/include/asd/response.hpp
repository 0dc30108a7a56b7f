#pragma once

#include <cstddef>

namespace asd {

/// arctan(sigmoid(w_raw)) * 2/pi. Strictly increasing with range (0, 0.5):
/// sigmoid stays below 1, so arctan stays below pi/4.
double normalize_response(double w_raw);

struct Discretized {
  std::size_t bin_index = 0;
  /// Bin centre, (bin_index + 0.5) / bins.
  double w_disc = 0.0;
};

/// Uniform binning of [0, 1). Throws ArgumentError for w_star outside
/// [0, 1) or bins == 0.
Discretized discretize(double w_star, std::size_t bins);

}  // namespace asd
