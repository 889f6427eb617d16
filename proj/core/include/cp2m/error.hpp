#pragma once

#include <stdexcept>
#include <string>

namespace cp2m {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

class UnmappedColorError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class EmptySplitError : public Error {
public:
    using Error::Error;
};

class EmptyEvaluationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace cp2m
