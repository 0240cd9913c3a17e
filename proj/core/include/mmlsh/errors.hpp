#pragma once

#include <stdexcept>
#include <string>

namespace mmlsh {

/// Malformed vector, index, profile, or report file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point-to-object mapping that does not cover every point exactly once.
class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter combination outside the domain of a formula.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller violated a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmlsh
