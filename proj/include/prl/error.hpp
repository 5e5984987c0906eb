#pragma once

#include <stdexcept>
#include <string>

namespace prl {

// Base for all pipeline errors. The CLI maps these to machine-readable
// JSONL records with the `kind()` tag.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
    virtual const char* kind() const noexcept { return "error"; }
};

// Malformed input file (bad header, bad row, bad binary payload).
class ParseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parse_error"; }
};

// Well-formed input violating an invariant (duplicate ids, bad ranges,
// referential gaps, dimension mismatches).
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation_error"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io_error"; }
};

// Numerical failure in a fit: divergence, separation, singular information.
class NumericError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numeric_error"; }
};

} // namespace prl
