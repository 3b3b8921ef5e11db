#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace occnlp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or arguments: a malformed record, a violated precondition,
/// a model that does not fit the vocabulary it is used with.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A malformed line in a line-oriented input (JSONL, CSV, vocabulary file).
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace occnlp
