#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace asd {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Op names accepted by run_gradient_suite, including the two end-to-end
/// model checks "model_continuous" and "model_discretized".
std::vector<std::string> gradient_check_names();

/// Central differences in double precision with h = 1e-4. Op checks must
/// stay below 1e-4 relative error, model checks below 1e-3. An empty `only`
/// runs everything; an unknown name is an ArgumentError.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, std::string_view only = {});

}  // namespace asd
