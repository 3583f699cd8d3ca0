#pragma once

#include <stdexcept>
#include <string>

namespace invt {

/// Base of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape mismatch, out-of-range value, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An image file could not be read or decoded.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// A configuration file or grid description is invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Not enough usable data points to carry out a fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A fit ran but the model is not identifiable or not of the expected kind.
class FitError : public Error {
public:
    using Error::Error;
};

/// A metric could not produce a distance. Carries the adapter transcript when
/// the metric is an external process.
class MetricError : public Error {
public:
    MetricError(const std::string& what, std::string transcript = {})
        : Error(what), transcript_(std::move(transcript)) {}

    const std::string& transcript() const noexcept { return transcript_; }

private:
    std::string transcript_;
};

}  // namespace invt
