#pragma once

#include <stdexcept>
#include <string>

namespace leakaudit {

// Operational failure; the CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Network-level failure talking to a model server. Retryable.
class TransportError : public Error {
public:
    using Error::Error;
};

// The server answered, but the response violates the wire contract.
// Never retried; the offending body is carried in the message.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Non-200 status with an error payload.
class ServerError : public Error {
public:
    ServerError(int status, const std::string& message)
        : Error("server error " + std::to_string(status) + ": " + message), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// Bad flags/config; the CLI maps these to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace leakaudit
