#pragma once

#include <stdexcept>
#include <string>

namespace jointrdf {

enum class ErrorKind {
  InvalidInput,  // dimension mismatch, asymmetry, negative eigenvalue
  Singular,      // matrix that must be invertible is not
  Infeasible,    // zero distortion against a block with positive variance
  Numerical,     // factorization or iteration failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace jointrdf
