#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gamdiag {

/// Base class for every error raised by the engine. `code()` is the
/// machine-readable tag used in HTTP error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string param = {})
        : std::runtime_error(message), code_(std::move(code)), param_(std::move(param)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& param() const noexcept { return param_; }

private:
    std::string code_;
    std::string param_;
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& message, std::string column = {})
        : Error("schema", message, std::move(column)) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t row)
        : Error("parse", message), row_(row) {}
    /// 1-based data row (header excluded).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class EmptyDatasetError : public Error {
public:
    EmptyDatasetError() : Error("empty_dataset", "dataset has no data rows") {}
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& name)
        : Error("unknown_column", "unknown column '" + name + "'", name) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message, std::string param = {})
        : Error("domain", message, std::move(param)) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& message) : Error("unsupported", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string param = {})
        : Error("config", message, std::move(param)) {}
};

class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& message) : Error("degenerate", message) {}
};

/// A build for the same cache key is still running past the wait limit.
class BusyError : public Error {
public:
    explicit BusyError(const std::string& message) : Error("busy", message) {}
};

}  // namespace gamdiag
