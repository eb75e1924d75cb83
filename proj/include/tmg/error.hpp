#pragma once

#include <stdexcept>
#include <string>

namespace tmg {

enum class ErrorKind {
    // input errors
    ParseError,
    UnbalancedPanel,
    DuplicateCell,
    NonFiniteValue,
    TooFewPeriods,
    InvalidConfig,
    // numerical failures
    SingularDesign,
    AllSingular,
    AllTrimmed,
    SingularPooledGram,
    SingularUnitGram,
    SingularVdelta,
    SingularTeSystem,
    SingularMbar,
    RequiresTGreaterK,
};

const char* to_string(ErrorKind kind);

// true for malformed input or configuration, false for numerical failures
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace tmg
