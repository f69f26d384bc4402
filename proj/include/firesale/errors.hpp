#pragma once

#include <stdexcept>
#include <string>

namespace firesale {

// Error categories map onto the CLI exit codes: validation failures exit
// with 2, numerical failures with 3, I/O and parse failures with 4.

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- validation ---------------------------------------------------------

struct InadmissibleScenario : ValidationError {
    using ValidationError::ValidationError;
};

struct ZeroRiskWeightedAssets : ValidationError {
    using ValidationError::ValidationError;
};

struct NoTradableAssets : ValidationError {
    using ValidationError::ValidationError;
};

struct NeverActivates : ValidationError {
    using ValidationError::ValidationError;
};

struct NotExponentialImpact : ValidationError {
    using ValidationError::ValidationError;
};

struct DomainExceeded : ValidationError {
    using ValidationError::ValidationError;
};

struct UnknownCaseStudy : ValidationError {
    using ValidationError::ValidationError;
};

struct UnsupportedJoint : ValidationError {
    using ValidationError::ValidationError;
};

// -- numerics -----------------------------------------------------------

struct NearSingularRegime : NumericalError {
    using NumericalError::NumericalError;
};

struct LinearSolveFailure : NumericalError {
    using NumericalError::NumericalError;
};

struct SingularUpdate : NumericalError {
    using NumericalError::NumericalError;
};

struct ConstraintDrift : NumericalError {
    using NumericalError::NumericalError;
};

struct DomainError : NumericalError {
    using NumericalError::NumericalError;
};

struct BranchDomainError : NumericalError {
    using NumericalError::NumericalError;
};

// -- I/O ----------------------------------------------------------------

struct ParseError : IoError {
    using IoError::IoError;
};

}  // namespace firesale
