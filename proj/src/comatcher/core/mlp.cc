#include "comatcher/core/mlp.h"

#include "comatcher/core/ops.h"

namespace comatcher {

void AddMlpParams(ParamStore* store, const std::string& prefix,
                  const MlpShape& shape) {
  store->AddUniform(prefix + ".fc1.weight", shape.in, shape.hidden, shape.in);
  store->AddUniform(prefix + ".fc1.bias", 1, shape.hidden, shape.in);
  store->AddConstant(prefix + ".norm.gamma", 1, shape.hidden, 1);
  store->AddConstant(prefix + ".norm.beta", 1, shape.hidden, 0);
  store->AddUniform(prefix + ".fc2.weight", shape.hidden, shape.out,
                    shape.hidden);
  store->AddUniform(prefix + ".fc2.bias", 1, shape.out, shape.hidden);
}

ad::Var Mlp(ad::Tape& tape, const ParamStore& store, const std::string& prefix,
            ad::Var x) {
  const std::string fc1w = prefix + ".fc1.weight";
  const std::string fc1b = prefix + ".fc1.bias";
  const std::string gamma = prefix + ".norm.gamma";
  const std::string beta = prefix + ".norm.beta";
  const std::string fc2w = prefix + ".fc2.weight";
  const std::string fc2b = prefix + ".fc2.bias";

  const Tensor2& w1 = store.value(fc1w);
  const Eigen::Index hidden = w1.cols();
  CheckShape(w1, x.cols(), -1, fc1w);
  CheckShape(store.value(fc1b), 1, hidden, fc1b);
  CheckShape(store.value(gamma), 1, hidden, gamma);
  CheckShape(store.value(beta), 1, hidden, beta);
  CheckShape(store.value(fc2w), hidden, -1, fc2w);
  CheckShape(store.value(fc2b), 1, store.value(fc2w).cols(), fc2b);

  ad::Var h = ad::Linear(x, tape.Parameter(store, fc1w),
                         tape.Parameter(store, fc1b));
  h = ad::LayerNorm(h, tape.Parameter(store, gamma),
                    tape.Parameter(store, beta));
  h = ad::Gelu(h);
  return ad::Linear(h, tape.Parameter(store, fc2w),
                    tape.Parameter(store, fc2b));
}

Tensor2 MlpForward(const ParamStore& store, const std::string& prefix,
                   const Tensor2& x) {
  ad::Tape tape(false);
  return Mlp(tape, store, prefix, tape.Constant(x)).value();
}

}  // namespace comatcher
