#include "comatcher/core/grad_check.h"

#include <cmath>

#include "comatcher/core/error.h"

namespace comatcher {
namespace {

double Evaluate(const LossBuilder& loss, const ParamStore& params) {
  ad::Tape tape(false);
  const double value = static_cast<double>(loss(tape, params).value()(0, 0));
  if (!std::isfinite(value)) {
    throw NumericError("nonfinite-loss");
  }
  return value;
}

}  // namespace

GradCheckResult GradCheck(const LossBuilder& loss, const ParamStore& params,
                          double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-4)) {
    throw Error("invalid-epsilon", std::to_string(epsilon));
  }
  ad::Tape tape;
  const ad::Var root = loss(tape, params);
  if (!std::isfinite(static_cast<double>(root.value()(0, 0)))) {
    throw NumericError("nonfinite-loss");
  }
  tape.Backward(root);
  const std::map<std::string, Tensor2> analytic = tape.ParameterGradients();

  ParamStore probe = params;
  GradCheckResult result;
  for (const std::string& name : params.Names()) {
    const auto it = analytic.find(name);
    Tensor2& value = probe.mutable_value(name);
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const Scalar saved = value.data()[k];
      value.data()[k] = saved + static_cast<Scalar>(epsilon);
      const double plus = Evaluate(loss, probe);
      value.data()[k] = saved - static_cast<Scalar>(epsilon);
      const double minus = Evaluate(loss, probe);
      value.data()[k] = saved;

      const double numeric = (plus - minus) / (2 * epsilon);
      const double exact =
          it == analytic.end() ? 0.0 : static_cast<double>(it->second.data()[k]);
      const double err =
          std::abs(exact - numeric) / std::max(1.0, std::abs(exact));
      ++result.num_checked;
      if (err > result.max_relative_error || result.worst_index < 0) {
        if (err >= result.max_relative_error) {
          result.max_relative_error = err;
          result.worst_parameter = name;
          result.worst_index = k;
        }
      }
    }
  }
  return result;
}

}  // namespace comatcher
