#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace frpt {

// Base of every error the library throws.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Operand shapes do not agree with what an operation requires.
class ShapeError : public Error {
   public:
    using Error::Error;
};

// Invalid user-supplied configuration (kernel sizes, ratios, JSON fields).
class ConfigError : public Error {
   public:
    using Error::Error;
};

// NaN / Inf where finite values are required.
class NumericError : public Error {
   public:
    using Error::Error;
};

// Misuse of a computation record (second backward, foreign variables).
class RecordError : public Error {
   public:
    using Error::Error;
};

// Malformed or corrupt file contents. Carries the byte offset of the problem.
class FormatError : public Error {
   public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

   private:
    std::size_t offset_;
};

// File contents parse but describe an inconsistent model.
class StructureError : public Error {
   public:
    using Error::Error;
};

}  // namespace frpt
