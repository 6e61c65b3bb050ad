#include "comatcher/core/ops.h"

#include <algorithm>
#include <cmath>

#include "comatcher/core/error.h"
#include "comatcher/core/kernels.h"

namespace comatcher {
namespace ad {
namespace {

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("shape-mismatch", std::string(op) + ": " +
                                      ShapeString(a.value()) + " vs " +
                                      ShapeString(b.value()));
  }
}

}  // namespace

Var MatMul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw Error("shape-mismatch", "MatMul: " + ShapeString(a.value()) +
                                      " * " + ShapeString(b.value()));
  }
  const int ia = a.id();
  const int ib = b.id();
  return a.tape()->Record(a.value() * b.value(), {a, b},
                          [ia, ib](Tape& t, int self) {
                            const Tensor2& g = t.grad(self);
                            if (t.needs_grad(ia)) {
                              t.mutable_grad(ia).noalias() +=
                                  g * t.value(ib).transpose();
                            }
                            if (t.needs_grad(ib)) {
                              t.mutable_grad(ib).noalias() +=
                                  t.value(ia).transpose() * g;
                            }
                          });
}

Var MatMulNT(Var a, Var b) {
  if (a.cols() != b.cols()) {
    throw Error("shape-mismatch", "MatMulNT: " + ShapeString(a.value()) +
                                      " * " + ShapeString(b.value()) + "^T");
  }
  const int ia = a.id();
  const int ib = b.id();
  return a.tape()->Record(a.value() * b.value().transpose(), {a, b},
                          [ia, ib](Tape& t, int self) {
                            const Tensor2& g = t.grad(self);
                            if (t.needs_grad(ia)) {
                              t.mutable_grad(ia).noalias() += g * t.value(ib);
                            }
                            if (t.needs_grad(ib)) {
                              t.mutable_grad(ib).noalias() +=
                                  g.transpose() * t.value(ia);
                            }
                          });
}

Var Transpose(Var a) {
  const int ia = a.id();
  return a.tape()->Record(a.value().transpose(), {a},
                          [ia](Tape& t, int self) {
                            t.mutable_grad(ia) += t.grad(self).transpose();
                          });
}

Var Add(Var a, Var b) {
  RequireSameShape(a, b, "Add");
  const int ia = a.id();
  const int ib = b.id();
  return a.tape()->Record(a.value() + b.value(), {a, b},
                          [ia, ib](Tape& t, int self) {
                            if (t.needs_grad(ia)) t.mutable_grad(ia) += t.grad(self);
                            if (t.needs_grad(ib)) t.mutable_grad(ib) += t.grad(self);
                          });
}

Var Sub(Var a, Var b) {
  RequireSameShape(a, b, "Sub");
  const int ia = a.id();
  const int ib = b.id();
  return a.tape()->Record(a.value() - b.value(), {a, b},
                          [ia, ib](Tape& t, int self) {
                            if (t.needs_grad(ia)) t.mutable_grad(ia) += t.grad(self);
                            if (t.needs_grad(ib)) t.mutable_grad(ib) -= t.grad(self);
                          });
}

Var Hadamard(Var a, Var b) {
  RequireSameShape(a, b, "Hadamard");
  const int ia = a.id();
  const int ib = b.id();
  return a.tape()->Record(
      a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
        const Tensor2& g = t.grad(self);
        if (t.needs_grad(ia)) t.mutable_grad(ia) += g.cwiseProduct(t.value(ib));
        if (t.needs_grad(ib)) t.mutable_grad(ib) += g.cwiseProduct(t.value(ia));
      });
}

Var Scale(Var a, Scalar s) {
  const int ia = a.id();
  return a.tape()->Record(a.value() * s, {a}, [ia, s](Tape& t, int self) {
    t.mutable_grad(ia) += t.grad(self) * s;
  });
}

Var AddRowBroadcast(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error("shape-mismatch", "AddRowBroadcast: " + ShapeString(a.value()) +
                                      " + " + ShapeString(row.value()));
  }
  const int ia = a.id();
  const int ir = row.id();
  Tensor2 out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->Record(std::move(out), {a, row}, [ia, ir](Tape& t, int self) {
    const Tensor2& g = t.grad(self);
    if (t.needs_grad(ia)) t.mutable_grad(ia) += g;
    if (t.needs_grad(ir)) t.mutable_grad(ir) += g.colwise().sum();
  });
}

Var RowScale(Var a, const VectorX& weights) {
  if (weights.size() != a.rows()) {
    throw Error("shape-mismatch", "RowScale: weights length " +
                                      std::to_string(weights.size()) + " for " +
                                      ShapeString(a.value()));
  }
  const int ia = a.id();
  Tensor2 out = weights.asDiagonal() * a.value();
  return a.tape()->Record(std::move(out), {a},
                          [ia, weights](Tape& t, int self) {
                            t.mutable_grad(ia) +=
                                weights.asDiagonal() * t.grad(self);
                          });
}

Var ColumnMul(Var column, Var a) {
  if (column.cols() != 1 || column.rows() != a.rows()) {
    throw Error("shape-mismatch", "ColumnMul: " + ShapeString(column.value()) +
                                      " with " + ShapeString(a.value()));
  }
  const int ic = column.id();
  const int ia = a.id();
  Tensor2 out = column.value().col(0).asDiagonal() * a.value();
  return a.tape()->Record(std::move(out), {column, a},
                          [ic, ia](Tape& t, int self) {
                            const Tensor2& g = t.grad(self);
                            if (t.needs_grad(ia)) {
                              t.mutable_grad(ia) +=
                                  t.value(ic).col(0).asDiagonal() * g;
                            }
                            if (t.needs_grad(ic)) {
                              t.mutable_grad(ic).col(0) +=
                                  g.cwiseProduct(t.value(ia)).rowwise().sum();
                            }
                          });
}

Var RowDot(Var a, Var b) {
  RequireSameShape(a, b, "RowDot");
  const int ia = a.id();
  const int ib = b.id();
  Tensor2 out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return a.tape()->Record(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const auto g = t.grad(self).col(0);
    if (t.needs_grad(ia)) t.mutable_grad(ia) += g.asDiagonal() * t.value(ib);
    if (t.needs_grad(ib)) t.mutable_grad(ib) += g.asDiagonal() * t.value(ia);
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw Error("shape-mismatch", "ConcatCols: no inputs");
  }
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw Error("shape-mismatch", "ConcatCols: row counts differ");
    }
    cols += p.cols();
  }
  Tensor2 out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.cols();
  }
  return parts[0].tape()->Record(
      std::move(out), parts, [ids, offsets](Tape& t, int self) {
        const Tensor2& g = t.grad(self);
        for (size_t k = 0; k < ids.size(); ++k) {
          if (t.needs_grad(ids[k])) {
            Tensor2& gk = t.mutable_grad(ids[k]);
            gk += g.middleCols(offsets[k], gk.cols());
          }
        }
      });
}

Var SliceCols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw Error("shape-mismatch", "SliceCols out of range");
  }
  const int ia = a.id();
  return a.tape()->Record(a.value().middleCols(start, count), {a},
                          [ia, start, count](Tape& t, int self) {
                            t.mutable_grad(ia).middleCols(start, count) +=
                                t.grad(self);
                          });
}

Var Sum(Var a) {
  const int ia = a.id();
  Tensor2 out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->Record(std::move(out), {a}, [ia](Tape& t, int self) {
    t.mutable_grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var AddAll(const std::vector<Var>& terms) {
  if (terms.empty()) {
    throw Error("shape-mismatch", "AddAll: no inputs");
  }
  Tensor2 out = terms[0].value();
  std::vector<int> ids{terms[0].id()};
  for (size_t k = 1; k < terms.size(); ++k) {
    if (terms[k].rows() != out.rows() || terms[k].cols() != out.cols()) {
      throw Error("shape-mismatch", "AddAll: shapes differ");
    }
    out += terms[k].value();
    ids.push_back(terms[k].id());
  }
  return terms[0].tape()->Record(std::move(out), terms,
                                 [ids](Tape& t, int self) {
                                   for (int id : ids) {
                                     if (t.needs_grad(id)) {
                                       t.mutable_grad(id) += t.grad(self);
                                     }
                                   }
                                 });
}

Var RowSoftmax(Var a) {
  const int ia = a.id();
  return a.tape()->Record(
      comatcher::RowSoftmax(a.value()), {a}, [ia](Tape& t, int self) {
        const Tensor2& y = t.value(self);
        const Tensor2& g = t.grad(self);
        const VectorX dot = g.cwiseProduct(y).rowwise().sum();
        Tensor2& ga = t.mutable_grad(ia);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
          ga.row(r).array() += y.row(r).array() * (g.row(r).array() - dot(r));
        }
      });
}

Var Sigmoid(Var a) {
  const int ia = a.id();
  return a.tape()->Record(
      a.value().unaryExpr([](Scalar x) { return comatcher::Sigmoid(x); }), {a},
      [ia](Tape& t, int self) {
        const Tensor2& y = t.value(self);
        t.mutable_grad(ia).array() +=
            t.grad(self).array() * y.array() * (Scalar(1) - y.array());
      });
}

Var Gelu(Var a) {
  const int ia = a.id();
  return a.tape()->Record(
      a.value().unaryExpr([](Scalar x) { return comatcher::Gelu(x); }), {a},
      [ia](Tape& t, int self) {
        t.mutable_grad(ia).array() +=
            t.grad(self).array() *
            t.value(ia)
                .unaryExpr([](Scalar x) { return GeluDerivative(x); })
                .array();
      });
}

Var LayerNorm(Var a, Var gamma, Var beta) {
  const Eigen::Index n = a.cols();
  if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 ||
      beta.cols() != n) {
    throw Error("shape-mismatch", "LayerNorm: scale/shift must be 1x" +
                                      std::to_string(n));
  }
  Tensor2 xhat = StandardizeRows(a.value());
  Tensor2 out = xhat.array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  const int ia = a.id();
  const int ig = gamma.id();
  const int ib = beta.id();
  return a.tape()->Record(
      std::move(out), {a, gamma, beta},
      [ia, ig, ib, xhat = std::move(xhat)](Tape& t, int self) {
        const Tensor2& g = t.grad(self);
        if (t.needs_grad(ig)) {
          t.mutable_grad(ig) += g.cwiseProduct(xhat).colwise().sum();
        }
        if (t.needs_grad(ib)) {
          t.mutable_grad(ib) += g.colwise().sum();
        }
        if (!t.needs_grad(ia)) {
          return;
        }
        const Tensor2& x = t.value(ia);
        const Scalar n = static_cast<Scalar>(x.cols());
        Tensor2& ga = t.mutable_grad(ia);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          const Scalar mean = x.row(r).sum() / n;
          const Scalar var = (x.row(r).array() - mean).square().sum() / n;
          const Scalar inv_std = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEps));
          const Eigen::Array<Scalar, 1, Eigen::Dynamic> dxhat =
              g.row(r).array() * t.value(ig).row(0).array();
          const Scalar sum_d = dxhat.sum();
          const Scalar sum_dx = (dxhat * xhat.row(r).array()).sum();
          ga.row(r).array() +=
              inv_std / n *
              (n * dxhat - sum_d - xhat.row(r).array() * sum_dx);
        }
      });
}

Var Linear(Var x, Var weight, Var bias) {
  return AddRowBroadcast(MatMul(x, weight), bias);
}

Var WeightedLogSum(Var a, std::vector<LogTerm> terms, bool complement) {
  const Tensor2& v = a.value();
  Scalar total = 0;
  for (const LogTerm& term : terms) {
    if (term.row < 0 || term.row >= v.rows() || term.col < 0 ||
        term.col >= v.cols()) {
      throw Error("index-out-of-range", "WeightedLogSum entry");
    }
    Scalar p = v(term.row, term.col);
    if (complement) p = Scalar(1) - p;
    p = std::clamp(p, Scalar(kLogClamp), Scalar(1 - kLogClamp));
    total += term.coef * std::log(p);
  }
  Tensor2 out(1, 1);
  out(0, 0) = total;
  const int ia = a.id();
  return a.tape()->Record(
      std::move(out), {a},
      [ia, terms = std::move(terms), complement](Tape& t, int self) {
        const Scalar g = t.grad(self)(0, 0);
        const Tensor2& v = t.value(ia);
        Tensor2& ga = t.mutable_grad(ia);
        for (const LogTerm& term : terms) {
          Scalar p = v(term.row, term.col);
          if (complement) p = Scalar(1) - p;
          if (p < Scalar(kLogClamp) || p > Scalar(1 - kLogClamp)) {
            continue;
          }
          const Scalar d = g * term.coef / p;
          ga(term.row, term.col) += complement ? -d : d;
        }
      });
}

}  // namespace ad
}  // namespace comatcher
