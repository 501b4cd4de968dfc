#pragma once

#include <stdexcept>
#include <string>

namespace tracelens {

// Library-wide error classes. The CLI maps these to distinct exit codes
// (parse = 2, config = 3, data = 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (span records, manifests, serialized models).
class ParseError : public Error {
public:
    using Error::Error;
};

// Invalid options or a setup that cannot run (bad thresholds, empty
// training set, unknown preset).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Inputs that violate an operation's preconditions (empty sequences,
// out-of-range symbols, insufficient corpora).
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace tracelens
