#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptss {

enum class ErrorCode {
  InvalidInput,
  InvalidTerm,
  OpenTerm,
  UnknownOperator,
  EpsOutOfRange,
  NotAFixpoint,
  BudgetExceeded,
  NotEvaluable,
  SupportTooLarge,
  IncompleteFragment,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ptss
