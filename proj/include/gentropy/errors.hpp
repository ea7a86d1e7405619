#pragma once

#include <stdexcept>
#include <string>

namespace gentropy {

// Invalid user-facing specification (unknown family, bad parameters, ...).
struct SpecError : std::invalid_argument {
    explicit SpecError(const std::string& what) : std::invalid_argument(what) {}
};

// A documented precondition gate rejected the inputs (e.g. a function class
// mismatch); the computation was refused, not attempted.
struct PreconditionError : std::domain_error {
    explicit PreconditionError(const std::string& what) : std::domain_error(what) {}
};

// Numeric evaluation failed (underflow without a log-domain form, invalid
// finite differences, ...).
struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// A bounded search ran out of room before its target was met.
struct HorizonError : std::runtime_error {
    explicit HorizonError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gentropy
