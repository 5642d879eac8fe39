// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace linksense {

// Error taxonomy shared by the core library, the C API and the CLI.
// The CLI maps kinds onto process exit codes: Config/Domain -> 1 (usage),
// Shape/Format -> 2 (data), Numeric -> 3.
enum class ErrorKind {
  kConfig,   // invalid configuration value
  kDomain,   // argument outside its documented domain
  kShape,    // tensor/layer shape mismatch
  kFormat,   // on-disk format violation
  kNumeric,  // NaN/Inf or failed numeric contract
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kShape, what) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::kFormat, what) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

// Raised by PCA/normalization on rank-deficient or constant input. Callers
// in the preprocessing pipeline catch it and substitute a flagged zero
// series; it escapes only on direct API misuse.
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kDomain:
      return 1;
    case ErrorKind::kShape:
    case ErrorKind::kFormat:
      return 2;
    case ErrorKind::kNumeric:
      return 3;
  }
  return 1;
}

}  // namespace linksense
