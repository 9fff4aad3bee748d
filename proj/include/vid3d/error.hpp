#pragma once

#include <stdexcept>
#include <string>

namespace vid3d {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Dataset ingestion
class MissingFrameError : public IoError {
public:
    using IoError::IoError;
};

class CountMismatchError : public IoError {
public:
    using IoError::IoError;
};

class ImageReadError : public IoError {
public:
    using IoError::IoError;
};

// Binary formats
class FormatError : public IoError {
public:
    using IoError::IoError;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Raised by the optimizer when the loss leaves the finite range.
class NonFiniteLossError : public Error {
public:
    NonFiniteLossError(int step, const std::string& what)
        : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

// Remote embedder
class EmbedError : public Error {
public:
    using Error::Error;
};

class EmbedConnectionError : public EmbedError {
public:
    using EmbedError::EmbedError;
};

class EmbedResponseError : public EmbedError {
public:
    using EmbedError::EmbedError;
};

class EmbedDimensionError : public EmbedError {
public:
    using EmbedError::EmbedError;
};

}  // namespace vid3d
