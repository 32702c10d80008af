#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace photongate {

/// Invalid configuration or argument. `field()` names the offending
/// setting as a dotted path (e.g. "pump.dt_ps") when one is known.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& message)
        : std::invalid_argument(message) {}
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A numerical procedure did not converge or hit a degenerate input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data too sparse or malformed for the requested analysis.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary or text input that does not follow its file format.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& message, std::uint64_t byte_offset)
        : std::runtime_error(message + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    std::uint64_t byte_offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace photongate
