#pragma once

#include <string>
#include <vector>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"

namespace comatcher {

// S = proj(source) proj(target)^T with the shared projection head.proj.
ad::Var ScoreMatrix(ad::Tape& tape, const ParamStore& params, ad::Var source,
                    ad::Var target);
// Row softmax times column softmax, entrywise.
ad::Var DualSoftmax(ad::Var scores);
// sigmoid(f w + b) from head.matchability, N x 1.
ad::Var Matchability(ad::Tape& tape, const ParamStore& params, ad::Var f);
// P(u, x) = S'(u, x) sigma_source(u) sigma_target(x).
ad::Var Assignment(ad::Var dual, ad::Var sigma_source, ad::Var sigma_target);

Tensor2 DualSoftmaxValues(const Tensor2& scores);
Tensor2 AssignmentValues(const Tensor2& dual, const VectorX& sigma_source,
                         const VectorX& sigma_target);

struct PairPrediction {
  ad::Var assignment;    // N_s x N_t
  ad::Var sigma_source;  // N_s x 1
  ad::Var sigma_target;  // N_t x 1
};

PairPrediction PredictPair(ad::Tape& tape, const ParamStore& params,
                           ad::Var source, ad::Var target);

struct ScoredMatch {
  int u = 0;
  int x = 0;
  double score = 0.0;
};

struct MatchSet {
  std::vector<ScoredMatch> pairs;  // ascending u
  std::vector<int> unmatched_source;
  std::vector<int> unmatched_target;
  bool unverified = false;
};

// Mutual argmax (ties to the smaller index) with P >= threshold. Throws
// Error("invalid-threshold") outside (0, 1).
MatchSet FilterMatches(const Tensor2& p, double threshold);

// Same rule with any threshold, including 0 (used on raw similarities).
MatchSet MutualArgmax(const Tensor2& p, double threshold);

}  // namespace comatcher
