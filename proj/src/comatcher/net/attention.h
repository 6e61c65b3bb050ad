#pragma once

#include <string>
#include <vector>

#include "comatcher/core/autodiff.h"
#include "comatcher/core/param_store.h"
#include "comatcher/geometry/group_tracks.h"
#include "comatcher/net/net_config.h"

namespace comatcher {

// Rotates every head of row r of x (N x heads*head_dim) by R(positions.row(r))
// using the per-head rotary basis (head_dim/2 x 2). Differentiable in x and
// in the basis; positions are constants.
ad::Var RotateRows(ad::Var x, const Tensor2& positions, ad::Var basis,
                   int heads);

// x W + b with the parameters prefix.weight / prefix.bias.
ad::Var Project(ad::Tape& tape, const ParamStore& params,
                const std::string& prefix, ad::Var x);

// x + update([x | message]).
ad::Var Update(ad::Tape& tape, const ParamStore& params,
               const std::string& block_prefix, ad::Var x, ad::Var message);

// Multi-head attention message for queries q over keys k with values v. The
// score of head h is the scaled dot product of the head slices; `row_plain`
// (optional) supplies alternative keys/queries whose scores replace the
// rotated ones on rows where use_rotated[r] == 0.
struct AttentionInputs {
  ad::Var q;
  ad::Var k;
  ad::Var v;
  ad::Var q_plain;  // optional
  ad::Var k_plain;  // optional
  VectorX use_rotated;
};
// Per-head attention distributions (rows sum to one).
std::vector<ad::Var> AttentionWeights(const AttentionInputs& in, int heads);
// Heads of the weighted values, concatenated.
ad::Var AttendValues(const std::vector<ad::Var>& weights, ad::Var v, int heads);

// Convex blending of a low-confidence point's attention row with the rows of
// its track partners in the other pairs:
//   a'_u = c_u a_u + (1 - c_u) sum_v c_v a_v / sum_v c_v
// applied when c_u < theta, u has partners, and their confidence mass is at
// least 1e-9. The gate is a constant of the forward pass; the blend is
// differentiable in both the rows and the confidences. alphas[i] is
// N_i x N_t and conf[i] is N_i x 1; `tracks` indexes pairs as views.
std::vector<ad::Var> MvCorrelate(const std::vector<ad::Var>& alphas,
                                 const std::vector<ad::Var>& conf,
                                 const GroupTracks& tracks, double theta);

// Value-only form of the same blend.
std::vector<Tensor2> MvCorrelateValues(const std::vector<Tensor2>& alphas,
                                       const std::vector<VectorX>& conf,
                                       const GroupTracks& tracks,
                                       double theta);

}  // namespace comatcher
