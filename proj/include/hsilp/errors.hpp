#pragma once

#include <stdexcept>
#include <string>

namespace hsilp {

enum class ErrorCode {
    malformed_header,
    truncated_payload,
    non_finite_values,
    dimension_mismatch,
    invalid_argument,
    io_failure,
    solver_failure,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::malformed_header: return "malformed_header";
        case ErrorCode::truncated_payload: return "truncated_payload";
        case ErrorCode::non_finite_values: return "non_finite_values";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io_failure: return "io_failure";
        case ErrorCode::solver_failure: return "solver_failure";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hsilp
