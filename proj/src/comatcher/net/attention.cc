#include "comatcher/net/attention.h"

#include <cmath>

#include "comatcher/core/error.h"
#include "comatcher/core/mlp.h"
#include "comatcher/core/ops.h"
#include "comatcher/geometry/rotary.h"

namespace comatcher {

ad::Var RotateRows(ad::Var x, const Tensor2& positions, ad::Var basis,
                   int heads) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index half = basis.rows();
  if (heads <= 0 || d % heads != 0 || (d / heads) % 2 != 0) {
    throw Error("odd-dimension", "rotary head width must be even");
  }
  if (basis.cols() != 2 || 2 * half != d / heads || positions.rows() != n ||
      positions.cols() != 2) {
    throw Error("shape-mismatch", "rotary basis " + ShapeString(basis.value()) +
                                      " for " + ShapeString(x.value()));
  }
  const Eigen::Index hd = d / heads;
  // Angles are cached for the backward pass.
  Tensor2 angles = positions * basis.value().transpose();  // n x half
  Tensor2 y = x.value();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index k = 0; k < half; ++k) {
      const Scalar theta = angles(r, k);
      if (theta == 0) continue;
      for (int h = 0; h < heads; ++h) {
        const Eigen::Index c = h * hd + 2 * k;
        RotatePair(theta, &y(r, c), &y(r, c + 1));
      }
    }
  }
  const int ix = x.id();
  const int ib = basis.id();
  return x.tape()->Record(
      std::move(y), {x, basis},
      [ix, ib, positions, angles, heads, hd, half](ad::Tape& t, int self) {
        const Tensor2& g = t.grad(self);
        const Tensor2& y = t.value(self);
        const Eigen::Index n = g.rows();
        if (t.needs_grad(ix)) {
          Tensor2& gx = t.mutable_grad(ix);
          for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index k = 0; k < half; ++k) {
              for (int h = 0; h < heads; ++h) {
                const Eigen::Index c = h * hd + 2 * k;
                Scalar a = g(r, c);
                Scalar b = g(r, c + 1);
                RotatePair(-angles(r, k), &a, &b);
                gx(r, c) += a;
                gx(r, c + 1) += b;
              }
            }
          }
        }
        if (t.needs_grad(ib)) {
          Tensor2 dtheta = Tensor2::Zero(n, half);
          for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index k = 0; k < half; ++k) {
              for (int h = 0; h < heads; ++h) {
                const Eigen::Index c = h * hd + 2 * k;
                dtheta(r, k) += -g(r, c) * y(r, c + 1) + g(r, c + 1) * y(r, c);
              }
            }
          }
          t.mutable_grad(ib).noalias() += dtheta.transpose() * positions;
        }
      });
}

ad::Var Project(ad::Tape& tape, const ParamStore& params,
                const std::string& prefix, ad::Var x) {
  const std::string w = prefix + ".weight";
  const std::string b = prefix + ".bias";
  CheckShape(params.value(w), x.cols(), -1, w);
  CheckShape(params.value(b), 1, params.value(w).cols(), b);
  return ad::Linear(x, tape.Parameter(params, w), tape.Parameter(params, b));
}

ad::Var Update(ad::Tape& tape, const ParamStore& params,
               const std::string& block_prefix, ad::Var x, ad::Var message) {
  return ad::Add(x, Mlp(tape, params, block_prefix + ".update",
                        ad::ConcatCols({x, message})));
}

std::vector<ad::Var> AttentionWeights(const AttentionInputs& in, int heads) {
  const Eigen::Index hd = in.q.cols() / heads;
  const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(hd));
  const bool mixed = in.q_plain.valid();
  VectorX plain_rows;
  if (mixed) plain_rows = VectorX::Ones(in.use_rotated.size()) - in.use_rotated;
  std::vector<ad::Var> out;
  for (int h = 0; h < heads; ++h) {
    ad::Var s = ad::MatMulNT(ad::SliceCols(in.q, h * hd, hd),
                             ad::SliceCols(in.k, h * hd, hd));
    if (mixed) {
      ad::Var plain = ad::MatMulNT(ad::SliceCols(in.q_plain, h * hd, hd),
                                   ad::SliceCols(in.k_plain, h * hd, hd));
      s = ad::Add(ad::RowScale(s, in.use_rotated),
                  ad::RowScale(plain, plain_rows));
    }
    out.push_back(ad::RowSoftmax(ad::Scale(s, scale)));
  }
  return out;
}

ad::Var AttendValues(const std::vector<ad::Var>& weights, ad::Var v,
                     int heads) {
  const Eigen::Index hd = v.cols() / heads;
  std::vector<ad::Var> parts;
  for (int h = 0; h < heads; ++h) {
    parts.push_back(ad::MatMul(weights[h], ad::SliceCols(v, h * hd, hd)));
  }
  return heads == 1 ? parts.front() : ad::ConcatCols(parts);
}

namespace {

struct Blend {
  int row = 0;
  Scalar c_u = 0;
  Scalar mass = 0;                        // sum of partner confidences
  std::vector<std::pair<int, int>> partners;  // (pair, row)
};

}  // namespace

std::vector<ad::Var> MvCorrelate(const std::vector<ad::Var>& alphas,
                                 const std::vector<ad::Var>& conf,
                                 const GroupTracks& tracks, double theta) {
  const int m = static_cast<int>(alphas.size());
  if (static_cast<int>(conf.size()) != m || tracks.num_views() != m) {
    throw Error("shape-mismatch", "correlation inputs disagree on pair count");
  }
  for (int i = 0; i < m; ++i) {
    if (alphas[i].cols() != alphas[0].cols() ||
        conf[i].rows() != alphas[i].rows() || conf[i].cols() != 1 ||
        tracks.num_points()[i] != alphas[i].rows()) {
      throw Error("shape-mismatch", "correlation inputs for pair " +
                                        std::to_string(i));
    }
  }
  std::vector<ad::Var> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    std::vector<Blend> blends;
    const Tensor2& ci = conf[i].value();
    for (int u = 0; u < alphas[i].rows(); ++u) {
      if (!(ci(u, 0) < theta)) continue;
      Blend b;
      b.row = u;
      b.c_u = ci(u, 0);
      for (const auto& [j, v] : tracks.Partners(i, u)) {
        b.partners.emplace_back(j, v);
        b.mass += conf[j].value()(v, 0);
      }
      if (b.partners.empty() || b.mass < 1e-9) continue;
      blends.push_back(std::move(b));
    }
    if (blends.empty()) {
      out.push_back(alphas[i]);
      continue;
    }
    Tensor2 value = alphas[i].value();
    for (const Blend& b : blends) {
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic> avg =
          Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(value.cols());
      for (const auto& [j, v] : b.partners) {
        avg += conf[j].value()(v, 0) * alphas[j].value().row(v);
      }
      avg /= b.mass;
      value.row(b.row) = b.c_u * value.row(b.row) + (1 - b.c_u) * avg;
    }
    std::vector<ad::Var> inputs(alphas.begin(), alphas.end());
    inputs.insert(inputs.end(), conf.begin(), conf.end());
    std::vector<int> alpha_ids, conf_ids;
    for (int j = 0; j < m; ++j) {
      alpha_ids.push_back(alphas[j].id());
      conf_ids.push_back(conf[j].id());
    }
    out.push_back(alphas[i].tape()->Record(
        std::move(value), inputs,
        [i, blends = std::move(blends), alpha_ids, conf_ids](ad::Tape& t,
                                                             int self) {
          const Tensor2& g = t.grad(self);
          const int ai = alpha_ids[i];
          if (t.needs_grad(ai)) {
            // Ungated rows pass straight through; gated rows are fixed below.
            Tensor2& ga = t.mutable_grad(ai);
            Tensor2 pass = g;
            for (const Blend& b : blends) pass.row(b.row).setZero();
            ga += pass;
          }
          for (const Blend& b : blends) {
            const auto gu = g.row(b.row);
            Eigen::Matrix<Scalar, 1, Eigen::Dynamic> avg =
                Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(g.cols());
            for (const auto& [j, v] : b.partners) {
              avg += t.value(conf_ids[j])(v, 0) * t.value(alpha_ids[j]).row(v);
            }
            avg /= b.mass;
            if (t.needs_grad(ai)) t.mutable_grad(ai).row(b.row) += b.c_u * gu;
            const int ci = conf_ids[i];
            if (t.needs_grad(ci)) {
              t.mutable_grad(ci)(b.row, 0) +=
                  gu.dot(t.value(ai).row(b.row) - avg);
            }
            const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> g_avg =
                (1 - b.c_u) * gu;
            for (const auto& [j, v] : b.partners) {
              const Scalar c_v = t.value(conf_ids[j])(v, 0);
              if (t.needs_grad(alpha_ids[j])) {
                t.mutable_grad(alpha_ids[j]).row(v) += (c_v / b.mass) * g_avg;
              }
              if (t.needs_grad(conf_ids[j])) {
                t.mutable_grad(conf_ids[j])(v, 0) +=
                    g_avg.dot(t.value(alpha_ids[j]).row(v) - avg) / b.mass;
              }
            }
          }
        }));
  }
  return out;
}

std::vector<Tensor2> MvCorrelateValues(const std::vector<Tensor2>& alphas,
                                       const std::vector<VectorX>& conf,
                                       const GroupTracks& tracks,
                                       double theta) {
  ad::Tape tape(false);
  std::vector<ad::Var> a, c;
  for (const auto& x : alphas) a.push_back(tape.Constant(x));
  for (const auto& x : conf) c.push_back(tape.Constant(Tensor2(x)));
  std::vector<Tensor2> out;
  for (const auto& v : MvCorrelate(a, c, tracks, theta)) {
    out.push_back(v.value());
  }
  return out;
}

}  // namespace comatcher
