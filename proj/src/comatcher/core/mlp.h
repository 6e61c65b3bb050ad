#pragma once

#include <string>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"

namespace comatcher {

// Two-layer perceptron: Linear(in -> hidden), LayerNorm(hidden), GeLU,
// Linear(hidden -> out). Parameters live under `prefix`:
//   prefix.fc1.weight (in x hidden)   prefix.fc1.bias (1 x hidden)
//   prefix.norm.gamma (1 x hidden)    prefix.norm.beta (1 x hidden)
//   prefix.fc2.weight (hidden x out)  prefix.fc2.bias (1 x out)
struct MlpShape {
  Eigen::Index in = 0;
  Eigen::Index hidden = 0;
  Eigen::Index out = 0;
};

void AddMlpParams(ParamStore* store, const std::string& prefix,
                  const MlpShape& shape);

// Throws Error("shape-mismatch") naming the offending parameter when the
// stored weights disagree with x or with each other.
ad::Var Mlp(ad::Tape& tape, const ParamStore& store, const std::string& prefix,
            ad::Var x);

// Value-only evaluation of the same network.
Tensor2 MlpForward(const ParamStore& store, const std::string& prefix,
                   const Tensor2& x);

}  // namespace comatcher
