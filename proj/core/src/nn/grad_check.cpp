#include "e2o/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "e2o/errors.hpp"

namespace e2o::nn {

double grad_check(const LossFn& loss, const GradFn& grad, std::span<const double> params, double step, double floor) {
  std::vector<double> x(params.begin(), params.end());
  const double base = loss(x);
  if (!std::isfinite(base)) throw DiagnosticError("grad_check: loss is not finite at the base point");
  const std::vector<double> analytic = grad(x);
  if (analytic.size() != x.size()) throw DiagnosticError("grad_check: gradient length does not match parameters");

  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = loss(x);
    x[i] = orig - step;
    const double down = loss(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DiagnosticError("grad_check: loss is not finite near coordinate " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace e2o::nn
