#pragma once

#include <stdexcept>
#include <string>

namespace ral {

/// Base class for all errors raised by this library.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input document (JSON/CSV syntax, missing fields).
struct parse_error : error {
    explicit parse_error(const std::string& what) : error(what) {}
};

/// Semantically invalid data: support mismatches, bad masses, infeasible
/// transfer plans, malformed programs.
struct input_error : error {
    explicit input_error(const std::string& what) : error(what) {}
};

/// A documented precondition of an operation does not hold (irregular prior
/// passed to the regular solver, fewer than two buyers, zero-mass point in a
/// virtual-value computation, ...).
struct precondition_error : error {
    explicit precondition_error(const std::string& what) : error(what) {}
};

/// Refusal to run a computation that would blow up (brute-force oracles on
/// large supports).
struct resource_error : error {
    explicit resource_error(const std::string& what) : error(what) {}
};

} // namespace ral
