#pragma once

#include <set>
#include <string>

#include "json.hpp"

#include "comatcher/core/error.h"

namespace comatcher {

// Strict reader for one JSON object of configuration values: every key must
// be consumed by Get, and values must convert to the field's type.
class JsonFields {
 public:
  JsonFields(const nlohmann::json& j, std::string scope)
      : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) {
      throw Error("invalid-config", scope_ + " must be an object",
                  ErrorKind::kUsage);
    }
  }

  template <typename T>
  void Get(const std::string& key, T* out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer() && !it->is_number_unsigned()) {
          throw Error("invalid-config", "", ErrorKind::kUsage);
        }
      }
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw Error("invalid-config", "", ErrorKind::kUsage);
      }
      *out = it->get<T>();
    } catch (const std::exception&) {
      throw Error("invalid-config", "bad value for " + Name(key),
                  ErrorKind::kUsage);
    }
  }

  bool Has(const std::string& key) const { return j_.contains(key); }
  void Skip(const std::string& key) { seen_.insert(key); }

  // Throws Error("unknown-key") for keys no Get asked for.
  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw Error("unknown-key", Name(key), ErrorKind::kUsage);
      }
    }
  }

  std::string Name(const std::string& key) const {
    return scope_.empty() ? key : scope_ + "." + key;
  }

 private:
  const nlohmann::json& j_;
  std::string scope_;
  std::set<std::string> seen_;
};

}  // namespace comatcher
