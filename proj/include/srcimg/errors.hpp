#pragma once

#include <stdexcept>
#include <string>

namespace srcimg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    ConfigError(const std::string& location, const std::string& what)
        : Error(location.empty() ? what : location + ": " + what), location_(location) {}
    const std::string& location() const { return location_; }

private:
    std::string location_;
};

struct NumericalError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct NoSupportDetected : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace srcimg
