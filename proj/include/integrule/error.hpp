#ifndef INTEGRULE_ERROR_HPP
#define INTEGRULE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace integrule {

enum class ErrorCode {
  InvalidArgument,
  InvalidExpression,
  Parse,
  Evaluation,
  Degenerate,
  Config,
  GridMismatch,
  Fit,
  Regression,
  AmbiguousForm,
  InsufficientData,
  NoRule,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(ErrorCode::Parse, what + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(double x)
      : Error(ErrorCode::Evaluation,
              "non-finite value at x=" + std::to_string(x)),
        x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

}  // namespace integrule

#endif  // INTEGRULE_ERROR_HPP
