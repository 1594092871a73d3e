#pragma once

#include <stdexcept>
#include <string>

namespace patrol {

/// Malformed input: bad documents, broken invariants, unknown ids.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric precondition failed (non-finite values, unnormalized rows, size guards).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace patrol
