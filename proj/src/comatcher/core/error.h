#pragma once

#include <stdexcept>
#include <string>

namespace comatcher {

// Exit-code class of an error when it surfaces at the command line.
enum class ErrorKind { kUsage, kData, kNumeric };

// Every recoverable failure in the library is raised as an Error whose code()
// is a short stable identifier such as "shape-mismatch" or "ransac-failure".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail = "",
        ErrorKind kind = ErrorKind::kData)
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)),
        kind_(kind) {}

  const std::string& code() const { return code_; }
  ErrorKind kind() const { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

inline Error NumericError(std::string code, const std::string& detail = "") {
  return Error(std::move(code), detail, ErrorKind::kNumeric);
}

inline Error DataError(std::string code, const std::string& detail = "") {
  return Error(std::move(code), detail, ErrorKind::kData);
}

}  // namespace comatcher
