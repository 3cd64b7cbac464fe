#pragma once

#include <stdexcept>
#include <string>

namespace catdiff {

// Each error family maps to one CLI exit code (see exit_code()).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Category, group, or variable index outside the declared space.
class DimensionError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Malformed argument: empty subset, bad concentration, bad schedule...
class ArgumentError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Requested dense enumeration exceeds the oracle cell cap.
class CapacityError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class IngestionError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class NumericalDegeneracyError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

}  // namespace catdiff
