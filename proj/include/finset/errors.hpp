#pragma once

#include <stdexcept>
#include <string>

namespace finset {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotSymmetric : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct EmptyTrajectory : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

struct UnknownExperiment : Error {
    using Error::Error;
};

/// Thrown when a matrix or vector is constructed with NaN/Inf entries.
struct NonFiniteValue : Error {
    using Error::Error;
};

}  // namespace finset
