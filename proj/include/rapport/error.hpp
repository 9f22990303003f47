#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rapport {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingAsset : public Error {
public:
    explicit MissingAsset(std::string file)
        : Error("missing asset: " + file), file_(std::move(file)) {}
    const std::string& file() const { return file_; }

private:
    std::string file_;
};

class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

struct Violation {
    std::string asset_id;
    std::string rule;
    std::string message;

    bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

class StorageUnavailable : public Error {
public:
    using Error::Error;
};

class SessionConflict : public Error {
public:
    explicit SessionConflict(const std::string& user_id)
        : Error("session already active for user " + user_id) {}
};

class InvalidState : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ConstantInput : public Error {
public:
    using Error::Error;
};

class UnknownSession : public Error {
public:
    explicit UnknownSession(const std::string& id) : Error("unknown session " + id) {}
};

class SessionClosed : public Error {
public:
    explicit SessionClosed(const std::string& id) : Error("session closed " + id) {}
};

class AlreadyRated : public Error {
public:
    explicit AlreadyRated(const std::string& id) : Error("session already rated " + id) {}
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

}  // namespace rapport
