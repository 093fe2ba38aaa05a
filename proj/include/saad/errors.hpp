#pragma once

#include <stdexcept>
#include <string>

namespace saad {

// Base type for everything thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated preconditions: bad configs, dimension mismatches, out-of-range
// parameters, malformed cell values.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Filesystem problems: missing files, unreadable/unwritable paths.
class IoError : public Error {
public:
    using Error::Error;
};

// Failures that arise while computing on otherwise valid inputs
// (e.g. a cleaning pass that drops every row).
class ComputeError : public Error {
public:
    using Error::Error;
};

} // namespace saad
