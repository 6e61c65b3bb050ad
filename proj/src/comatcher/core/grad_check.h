#pragma once

#include <functional>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"

namespace comatcher {

// Builds a scalar (1x1) loss on the given tape, reading parameters from the
// given store.
using LossBuilder = std::function<ad::Var(ad::Tape&, const ParamStore&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  size_t num_checked = 0;
};

// Compares the tape gradient of `loss` against central differences for every
// scalar of every parameter. Relative error is
// |analytic - numeric| / max(1, |analytic|). `params` is not modified.
// Throws Error("nonfinite-loss") if any evaluation is not finite.
GradCheckResult GradCheck(const LossBuilder& loss, const ParamStore& params,
                          double epsilon);

}  // namespace comatcher
