#include "asd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "asd/errors.hpp"

namespace asd {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

double finite_diff_check(const std::function<Var<double>(Var<double>)>& f, const Tensor<double>& x, double h) {
  Tensor<double> p(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
  Tensor<double>* params[] = {&p};
  return finite_diff_check([&](Graph<double>& g) { return f(g.param(p)); }, params, {}, h);
}

double finite_diff_check(const std::function<Var<double>(Graph<double>&)>& f,
                         std::span<Tensor<double>* const> params, std::span<const ParamCoordinate> coords,
                         double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_check: step must be > 0");

  std::vector<bool> had_grad;
  for (auto* p : params) {
    had_grad.push_back(p->requires_grad());
    p->set_requires_grad(true);
  }

  {
    Graph<double> g;
    g.backward(f(g));
  }

  std::vector<ParamCoordinate> all;
  if (coords.empty()) {
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t i = 0; i < params[t]->size(); ++i) all.push_back({t, i});
    coords = all;
  }

  auto eval = [&] {
    Graph<double> g;
    return f(g).item();
  };

  double worst = 0.0;
  for (const auto& c : coords) {
    if (c.tensor >= params.size()) throw ArgumentError("finite_diff_check: coordinate names a missing tensor");
    auto& p = *params[c.tensor];
    const double orig = p[c.index];
    p[c.index] = orig + h;
    const double up = eval();
    p[c.index] = orig - h;
    const double down = eval();
    p[c.index] = orig;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, relative_error(p.grad()[c.index], numeric));
  }

  for (std::size_t t = 0; t < params.size(); ++t) params[t]->set_requires_grad(had_grad[t]);
  return worst;
}

}  // namespace asd
