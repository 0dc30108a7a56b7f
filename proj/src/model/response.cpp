#include "asd/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "asd/errors.hpp"

namespace asd {

double normalize_response(double w_raw) {
  const double s = 1.0 / (1.0 + std::exp(-w_raw));
  return std::atan(s) * 2.0 / std::numbers::pi;
}

Discretized discretize(double w_star, std::size_t bins) {
  if (bins == 0) throw ArgumentError("discretize: bins must be >= 1");
  if (!(w_star >= 0.0 && w_star < 1.0))
    throw ArgumentError("discretize: response " + std::to_string(w_star) + " outside [0, 1)");
  const auto b = static_cast<double>(bins);
  const auto idx = std::min(static_cast<std::size_t>(std::floor(w_star * b)), bins - 1);
  return {idx, (static_cast<double>(idx) + 0.5) / b};
}

}  // namespace asd
