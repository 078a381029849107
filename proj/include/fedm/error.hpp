#pragma once

#include <stdexcept>
#include <string>

namespace fedm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in a model, referent or scenario document. Positions are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    int line_;
    int column_;
};

enum class ModelErrorKind {
    unresolved_identifier,
    duplicate_name,
    cf_out_of_range,
    empty_principles,
    missing_rule_kinds,
    invalid_membership,
    coverage_gap,
    kind_mismatch,
    invalid_structure,
};

/// A document parsed but violates a well-formedness invariant.
class ModelError : public Error {
public:
    ModelError(ModelErrorKind kind, const std::string& message)
        : Error(message), kind_(kind) {}

    ModelErrorKind kind() const noexcept { return kind_; }

private:
    ModelErrorKind kind_;
};

enum class InferenceErrorKind {
    out_of_range,
    missing_input,
    uncovered_risk,
    uncovered_decision,
    empty_surface,
    unresolved_atom,
    unsupported,
};

class InferenceError : public Error {
public:
    InferenceError(InferenceErrorKind kind, const std::string& message)
        : Error(message), kind_(kind) {}

    InferenceErrorKind kind() const noexcept { return kind_; }

    /// True for the two "input not covered" kinds, which signal rule-base gaps.
    bool is_coverage_gap() const noexcept
    {
        return kind_ == InferenceErrorKind::uncovered_risk || kind_ == InferenceErrorKind::uncovered_decision;
    }

private:
    InferenceErrorKind kind_;
};

/// No decision rule concluding the recommended action fired.
class ExplanationError : public Error {
public:
    using Error::Error;
};

/// Reachability exploration exceeded its state cap, or a check was misconfigured.
class VerificationError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace fedm
