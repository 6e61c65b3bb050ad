#include "comatcher/training/losses.h"

#include <algorithm>
#include <cmath>

#include "comatcher/core/error.h"
#include "comatcher/core/ops.h"

namespace comatcher {
namespace {

bool Empty(const GtLabels& l) {
  return l.matches.empty() && l.unmatched_source.empty() &&
         l.unmatched_target.empty();
}

void CheckLabels(const GtLabels& l, Eigen::Index ns, Eigen::Index nt) {
  if (Empty(l)) throw DataError("empty-supervision", "pair has no labels");
  auto bad = [](int v, Eigen::Index n) { return v < 0 || v >= n; };
  for (const auto& [u, x] : l.matches) {
    if (bad(u, ns) || bad(x, nt)) {
      throw DataError("index-out-of-range", "gt match index");
    }
  }
  for (int u : l.unmatched_source) {
    if (bad(u, ns)) throw DataError("index-out-of-range", "unmatched source");
  }
  for (int x : l.unmatched_target) {
    if (bad(x, nt)) throw DataError("index-out-of-range", "unmatched target");
  }
}

double ClampedLog(double p) {
  return std::log(std::clamp(p, ad::kLogClamp, 1.0 - ad::kLogClamp));
}

}  // namespace

ad::Var CorrespondenceLoss(const PairPrediction& pred, const GtLabels& l) {
  CheckLabels(l, pred.assignment.rows(), pred.assignment.cols());
  std::vector<ad::Var> terms;
  if (!l.matches.empty()) {
    std::vector<ad::LogTerm> t;
    const Scalar c = -1.0 / static_cast<Scalar>(l.matches.size());
    for (const auto& [u, x] : l.matches) t.push_back({u, x, c});
    terms.push_back(ad::WeightedLogSum(pred.assignment, std::move(t), false));
  }
  auto side = [&](const std::vector<int>& idx, ad::Var sigma) {
    if (idx.empty()) return;
    std::vector<ad::LogTerm> t;
    const Scalar c = -0.5 / static_cast<Scalar>(idx.size());
    for (int u : idx) t.push_back({u, 0, c});
    terms.push_back(ad::WeightedLogSum(sigma, std::move(t), true));
  };
  side(l.unmatched_source, pred.sigma_source);
  side(l.unmatched_target, pred.sigma_target);
  return terms.size() == 1 ? terms.front() : ad::AddAll(terms);
}

double CorrespondenceLossValue(const Tensor2& p, const VectorX& ss,
                               const VectorX& st, const GtLabels& l) {
  CheckLabels(l, p.rows(), p.cols());
  double loss = 0;
  if (!l.matches.empty()) {
    double s = 0;
    for (const auto& [u, x] : l.matches) s += ClampedLog(p(u, x));
    loss -= s / static_cast<double>(l.matches.size());
  }
  auto side = [&](const std::vector<int>& idx, const VectorX& sigma) {
    if (idx.empty()) return;
    double s = 0;
    for (int u : idx) s += ClampedLog(1.0 - sigma(u));
    loss -= s / (2.0 * static_cast<double>(idx.size()));
  };
  side(l.unmatched_source, ss);
  side(l.unmatched_target, st);
  return loss;
}

std::vector<VectorX> ConfidenceLabels(
    const std::vector<std::pair<Tensor2, Tensor2>>& layers,
    const MatchSet& final_matches, double threshold) {
  std::vector<VectorX> out;
  if (layers.empty()) return out;
  const Eigen::Index n = layers.front().first.rows();
  std::vector<int> final_partner(n, -1);
  for (const auto& m : final_matches.pairs) final_partner[m.u] = m.x;
  for (const auto& [src, tgt] : layers) {
    const Tensor2 scores = src * tgt.transpose();
    const MatchSet inter = MutualArgmax(DualSoftmaxValues(scores), threshold);
    std::vector<int> partner(n, -1);
    for (const auto& m : inter.pairs) partner[m.u] = m.x;
    VectorX y(n);
    for (Eigen::Index u = 0; u < n; ++u) {
      y(u) = partner[u] == final_partner[u] ? 1.0 : 0.0;
    }
    out.push_back(std::move(y));
  }
  return out;
}

ad::Var ConfidenceLoss(const std::vector<ad::Var>& conf,
                       const std::vector<VectorX>& labels) {
  if (conf.size() != labels.size() || conf.empty()) {
    throw Error("shape-mismatch", "confidence layers vs labels");
  }
  const Scalar c = -1.0 / static_cast<Scalar>(conf.size());
  std::vector<ad::Var> terms;
  for (size_t l = 0; l < conf.size(); ++l) {
    if (conf[l].rows() != labels[l].size()) {
      throw Error("shape-mismatch", "confidence layer " + std::to_string(l));
    }
    std::vector<ad::LogTerm> pos, neg;
    for (Eigen::Index u = 0; u < labels[l].size(); ++u) {
      (labels[l](u) > 0.5 ? pos : neg).push_back({u, 0, c});
    }
    if (!pos.empty()) terms.push_back(ad::WeightedLogSum(conf[l], pos, false));
    if (!neg.empty()) terms.push_back(ad::WeightedLogSum(conf[l], neg, true));
  }
  if (terms.empty()) return conf.front().tape()->Constant(Tensor2::Zero(1, 1));
  return terms.size() == 1 ? terms.front() : ad::AddAll(terms);
}

double ConfidenceLossValue(const std::vector<VectorX>& conf,
                           const std::vector<VectorX>& labels) {
  if (conf.size() != labels.size() || conf.empty()) {
    throw Error("shape-mismatch", "confidence layers vs labels");
  }
  double total = 0;
  for (size_t l = 0; l < conf.size(); ++l) {
    if (conf[l].size() != labels[l].size()) {
      throw Error("shape-mismatch", "confidence layer " + std::to_string(l));
    }
    for (Eigen::Index u = 0; u < conf[l].size(); ++u) {
      total -= labels[l](u) > 0.5 ? ClampedLog(conf[l](u))
                                  : ClampedLog(1.0 - conf[l](u));
    }
  }
  return total / static_cast<double>(conf.size());
}

LossBreakdown TotalLoss(std::vector<double> corr, std::vector<double> conf,
                        double alpha) {
  if (corr.size() != conf.size() || corr.empty()) {
    throw Error("shape-mismatch", "per-pair loss lists");
  }
  LossBreakdown b;
  b.alpha = alpha;
  double sum = 0;
  for (size_t i = 0; i < corr.size(); ++i) sum += corr[i] + alpha * conf[i];
  b.total = sum / static_cast<double>(corr.size());
  b.corr = std::move(corr);
  b.conf = std::move(conf);
  return b;
}

GroupLoss ComputeGroupLoss(ad::Tape& tape, const ParamStore& params,
                           const NetConfig& cfg, const GroupInput& input,
                           const std::vector<GtLabels>& labels, double alpha) {
  const int m = input.num_pairs();
  if (static_cast<int>(labels.size()) != m) {
    throw Error("shape-mismatch", "one label set per pair expected");
  }
  ForwardOptions fo;
  fo.keep_snapshots = true;
  const ForwardResult fwd = Forward(tape, params, cfg, input, fo);
  std::vector<ad::Var> terms;
  std::vector<double> corr(m, 0.0), conf(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (Empty(labels[i])) continue;
    const PairPrediction pred =
        PredictPair(tape, params, fwd.states[i].source, fwd.states[i].target);
    const ad::Var c = CorrespondenceLoss(pred, labels[i]);
    corr[i] = c.value()(0, 0);
    terms.push_back(c);
    if (fwd.confidence.empty()) continue;
    std::vector<ad::Var> layer_conf;
    std::vector<std::pair<Tensor2, Tensor2>> layer_feat;
    for (size_t l = 0; l < fwd.confidence.size(); ++l) {
      layer_conf.push_back(fwd.confidence[l][i]);
      layer_feat.push_back(fwd.snapshots[l][i]);
    }
    const MatchSet final_matches =
        MutualArgmax(pred.assignment.value(), cfg.match_threshold);
    const ad::Var k = ConfidenceLoss(
        layer_conf,
        ConfidenceLabels(layer_feat, final_matches, cfg.match_threshold));
    conf[i] = k.value()(0, 0);
    terms.push_back(ad::Scale(k, alpha));
  }
  GroupLoss out;
  out.breakdown = TotalLoss(std::move(corr), std::move(conf), alpha);
  const ad::Var sum = terms.empty()
                          ? tape.Constant(Tensor2::Zero(1, 1))
                          : (terms.size() == 1 ? terms.front()
                                               : ad::AddAll(terms));
  out.total = ad::Scale(sum, 1.0 / static_cast<Scalar>(m));
  return out;
}

}  // namespace comatcher
