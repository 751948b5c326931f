#pragma once

#include <stdexcept>
#include <string>

namespace epiquant {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecodeError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct EmptyMaskError : Error {
    using Error::Error;
};
struct EmptyInputError : Error {
    using Error::Error;
};
struct SingularMatrixError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct TooFewPointsError : Error {
    using Error::Error;
};
struct UndefinedForKOneError : Error {
    using Error::Error;
};
struct SubsetViolationError : Error {
    using Error::Error;
};

}  // namespace epiquant
