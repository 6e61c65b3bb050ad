#include "comatcher/core/tensor.h"

#include "comatcher/core/error.h"

namespace comatcher {

bool AllFinite(const Tensor2& t) { return t.allFinite(); }

std::string ShapeString(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void CheckShape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols,
                const std::string& what) {
  if ((rows >= 0 && t.rows() != rows) || (cols >= 0 && t.cols() != cols)) {
    throw Error("shape-mismatch",
                what + " is " + ShapeString(t) + ", expected " +
                    (rows >= 0 ? std::to_string(rows) : "*") + "x" +
                    (cols >= 0 ? std::to_string(cols) : "*"));
  }
}

}  // namespace comatcher
