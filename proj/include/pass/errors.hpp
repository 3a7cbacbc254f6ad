#pragma once

#include <stdexcept>
#include <string>

namespace pass {

// Precondition violations: bad dimensions, out-of-range parameters,
// non-finite inputs.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Singular normal equations with zero ridge penalty.
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A residual batch with zero sample variance; a data-quality event, not a
// drift signal.
struct DegenerateBatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Accept-reject sampling exceeded its attempt budget without filling the
// requested quota.
struct ProgressFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Control-limit search failed to bracket or converge.
struct CalibrationFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed config / CSV input; message carries the location.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment produced too many censored runs to summarize.
struct UnstableConfigurationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pass
