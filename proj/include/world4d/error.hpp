#pragma once

#include <stdexcept>
#include <string>

namespace world4d {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A precondition on caller-supplied data does not hold.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

/// An operation that requires a non-empty operand received an empty one.
class EmptySetError : public Error {
public:
    explicit EmptySetError(const std::string& msg) : Error(msg) {}
};

/// An on-disk artifact deviates from its documented byte layout.
/// The message names the file and, where known, the byte offset.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

}  // namespace world4d
