#pragma once

#include <stdexcept>
#include <string>

namespace elpi {

// Base for all library errors; CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user configuration (flags, config file, inconsistent options). Exit 2.
struct ConfigError : Error {
    using Error::Error;
};

// Bad input data: unreadable files, malformed tables, structural graph
// violations, degenerate inputs. Exit 3.
struct DataError : Error {
    using Error::Error;
};

// Numeric failures: singular solves, all points trimmed, empty results. Exit 4.
struct NumericError : Error {
    using Error::Error;
};

} // namespace elpi
