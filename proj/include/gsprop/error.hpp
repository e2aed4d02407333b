#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsprop {

// Malformed or truncated input. `offset` is the byte offset into the source
// stream where the problem was detected, when known.
class ParseError : public std::runtime_error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit ParseError(const std::string& what, std::size_t offset = npos)
        : std::runtime_error(what), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Violated contract on otherwise well-formed data: bad ranges, missing
// records, inconsistent dimensions.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport or protocol failure talking to an external endpoint.
class EndpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gsprop
