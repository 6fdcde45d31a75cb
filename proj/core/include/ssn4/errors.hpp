#pragma once

#include <stdexcept>
#include <string>

namespace ssn4 {

// Shape or argument contract violated by the caller.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite values or other numeric breakdowns.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, malformed corpora, checkpoint mismatches.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed text input, pinned to a 1-based line number.
struct ParseError : DataError {
    int line;
    ParseError(const std::string& msg, int line_no)
        : DataError("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

}  // namespace ssn4
