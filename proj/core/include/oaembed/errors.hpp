#pragma once

#include <stdexcept>
#include <string>

namespace oaembed {

// Error taxonomy mirrors the CLI exit-code mapping:
//   DomainError    -> exit 1
//   UsageError     -> exit 2
//   TransportError / IoError -> exit 3
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& msg, int attempts_made = 1)
        : std::runtime_error(msg), attempts(attempts_made) {}
    int attempts;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Service replied but the payload could not be interpreted.
class ParseError : public IoError {
public:
    using IoError::IoError;
};

class OovError : public DomainError {
public:
    explicit OovError(const std::string& term)
        : DomainError("term not in vocabulary: " + term), term(term) {}
    std::string term;
};

class CorruptFileError : public IoError {
public:
    using IoError::IoError;
};

class VersionMismatchError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace oaembed
