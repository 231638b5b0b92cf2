// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 fleetdp contributors

#pragma once

#include <stdexcept>
#include <string>

namespace fleetdp {

enum class ErrorCode {
    InvalidArgument,
    ConstraintViolation,
    Infeasible,
    SizeLimit,
    BudgetExceeded,
    Parse,
    Io,
    EmptyScenario,
    DimensionMismatch,
    DegenerateData,
    ModelVersion,
    Internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace fleetdp
