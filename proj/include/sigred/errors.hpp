#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigred {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& what)
        : Error("syntax error at offset " + std::to_string(position) + ": " + what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownSymbol : public Error {
public:
    explicit UnknownSymbol(std::string name)
        : Error("unknown symbol '" + name + "'"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnboundSymbol : public Error {
public:
    explicit UnboundSymbol(const std::string& name) : Error("unbound symbol '" + name + "'") {}
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Raised when a sampled comparison cannot collect enough admissible points.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class ChartMismatch : public Error {
public:
    using Error::Error;
};

class SizeMismatch : public Error {
public:
    using Error::Error;
};

} // namespace sigred
