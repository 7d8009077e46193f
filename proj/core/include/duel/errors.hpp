#pragma once

#include <stdexcept>
#include <string>

namespace duel {

/// Base class for everything thrown by the engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad inputs: malformed descriptors, unmet preconditions, unsupported queries.
/// The CLI maps these to exit code 1.
struct InputError : Error {
    using Error::Error;
};

/// A comparison between enclosure-backed values could not be decided within
/// the configured precision cap.
struct UndecidableComparison : InputError {
    using InputError::InputError;
};

/// A runtime self-check of one of the constructions failed. This always
/// indicates an engine bug, never a user error. The CLI maps these to exit
/// code 2.
struct InvariantViolation : Error {
    using Error::Error;
};

struct DepthCapExceeded : InputError {
    using InputError::InputError;
};

struct EmptySet : InputError {
    using InputError::InputError;
};

struct UnknownSpec : InputError {
    using InputError::InputError;
};

struct NotHistoryIndependent : InputError {
    using InputError::InputError;
};

struct SteppedBankruptRun : InputError {
    using InputError::InputError;
};

struct EmptyWindow : InputError {
    using InputError::InputError;
};

struct MismatchedRuns : InputError {
    using InputError::InputError;
};

struct Unsupported : InputError {
    using InputError::InputError;
};

struct UnboundedA : InputError {
    using InputError::InputError;
};

struct BNotBoundedAwayFromZero : InputError {
    using InputError::InputError;
};

struct NotWellOrdered : InputError {
    using InputError::InputError;
};

struct InvalidState : InputError {
    using InputError::InputError;
};

struct MissingColumns : InputError {
    using InputError::InputError;
};

struct MonotonicityViolation : InvariantViolation {
    using InvariantViolation::InvariantViolation;
};

struct FragilityAssertionFailed : InvariantViolation {
    using InvariantViolation::InvariantViolation;
};

}  // namespace duel
