#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symdistill {

// Malformed input to an operation: bad shapes, unknown operators, out-of-range indices.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration that cannot be honoured (invalid probabilities, sizes, flags).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problems with data files or their contents.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message)
        , offset_(offset)
    {
    }

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace symdistill
