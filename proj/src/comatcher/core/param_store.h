#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "comatcher/core/tensor.h"

namespace comatcher {

// Named learned weights with one gradient slot per entry. Entries are kept
// sorted by name so iteration order is reproducible.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0);

  // Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn from the store's
  // generator in call order.
  void AddUniform(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                  Eigen::Index fan_in);
  void AddConstant(const std::string& name, Eigen::Index rows,
                   Eigen::Index cols, Scalar value);
  void Add(const std::string& name, Tensor2 value);

  bool Contains(const std::string& name) const;
  const Tensor2& value(const std::string& name) const;
  Tensor2& mutable_value(const std::string& name);
  const Tensor2& grad(const std::string& name) const;
  Tensor2& mutable_grad(const std::string& name);

  std::vector<std::string> Names() const;
  size_t NumScalars() const;
  void ZeroGrad();
  double GradNorm() const;

  uint64_t seed() const { return seed_; }

 private:
  struct Entry {
    Tensor2 value;
    Tensor2 grad;
  };
  const Entry& Find(const std::string& name) const;
  Entry& Find(const std::string& name);

  uint64_t seed_;
  std::mt19937_64 rng_;
  std::map<std::string, Entry> entries_;
};

}  // namespace comatcher
