#include "comatcher/core/param_store.h"

#include <cmath>

#include "comatcher/core/error.h"

namespace comatcher {

ParamStore::ParamStore(uint64_t seed) : seed_(seed), rng_(seed) {}

void ParamStore::Add(const std::string& name, Tensor2 value) {
  if (entries_.count(name) != 0) {
    throw Error("duplicate-parameter", name);
  }
  Entry entry;
  entry.grad = Tensor2::Zero(value.rows(), value.cols());
  entry.value = std::move(value);
  entries_.emplace(name, std::move(entry));
}

void ParamStore::AddUniform(const std::string& name, Eigen::Index rows,
                            Eigen::Index cols, Eigen::Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor2 value(rows, cols);
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    value.data()[i] = static_cast<Scalar>(dist(rng_));
  }
  Add(name, std::move(value));
}

void ParamStore::AddConstant(const std::string& name, Eigen::Index rows,
                             Eigen::Index cols, Scalar value) {
  Add(name, Tensor2::Constant(rows, cols, value));
}

bool ParamStore::Contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const ParamStore::Entry& ParamStore::Find(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("missing-parameter", name);
  }
  return it->second;
}

ParamStore::Entry& ParamStore::Find(const std::string& name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error("missing-parameter", name);
  }
  return it->second;
}

const Tensor2& ParamStore::value(const std::string& name) const {
  return Find(name).value;
}

Tensor2& ParamStore::mutable_value(const std::string& name) {
  return Find(name).value;
}

const Tensor2& ParamStore::grad(const std::string& name) const {
  return Find(name).grad;
}

Tensor2& ParamStore::mutable_grad(const std::string& name) {
  return Find(name).grad;
}

std::vector<std::string> ParamStore::Names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& [name, entry] : entries_) {
    names.push_back(name);
  }
  return names;
}

size_t ParamStore::NumScalars() const {
  size_t total = 0;
  for (const auto& [name, entry] : entries_) {
    total += static_cast<size_t>(entry.value.size());
  }
  return total;
}

void ParamStore::ZeroGrad() {
  for (auto& [name, entry] : entries_) {
    entry.grad.setZero();
  }
}

double ParamStore::GradNorm() const {
  double sum = 0.0;
  for (const auto& [name, entry] : entries_) {
    sum += static_cast<double>(entry.grad.squaredNorm());
  }
  return std::sqrt(sum);
}

}  // namespace comatcher
