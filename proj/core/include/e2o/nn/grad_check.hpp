#pragma once

#include <functional>
#include <span>
#include <vector>

namespace e2o::nn {

using LossFn = std::function<double(std::span<const double>)>;
using GradFn = std::function<std::vector<double>(std::span<const double>)>;

/// Worst per-coordinate relative error |g - fd| / max(|g|, |fd|, floor)
/// between an analytic gradient and central finite differences, all in
/// double precision. Throws DiagnosticError on a non-finite loss.
double grad_check(const LossFn& loss, const GradFn& grad, std::span<const double> params, double step = 1e-4,
                  double floor = 1e-6);

}  // namespace e2o::nn
