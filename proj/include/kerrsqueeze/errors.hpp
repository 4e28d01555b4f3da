// errors.hpp
// Exception hierarchy shared by every kerrsqueeze module.

#pragma once

#include <stdexcept>
#include <string>

namespace kerrsqueeze {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A state carries more than the allowed probability in the top of the
// truncated basis, so moments computed from it are not trustworthy.
class TruncationOverflow : public Error {
public:
    using Error::Error;
};

class SingularParameter : public Error {
public:
    using Error::Error;
};

class OptimizationFailed : public Error {
public:
    using Error::Error;
};

class AnalysisFailed : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace kerrsqueeze
