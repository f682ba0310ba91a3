#pragma once

#include <stdexcept>
#include <string>

namespace rpls {

enum class ErrorCode {
  InvalidInput,
  NotPositiveDefinite,
  BaseMismatch,
  InvalidComponents,
  DegenerateResponse,
  NonConvergence,
  RankDeficiency,
  DegenerateModel,
  EmptyInput,
  ConstantSignal,
  OutOfDomain,
  ParseError,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::InvalidComponents: return "InvalidComponents";
    case ErrorCode::DegenerateResponse: return "DegenerateResponse";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::RankDeficiency: return "RankDeficiency";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConstantSignal: return "ConstantSignal";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rpls
