#pragma once

#include <stdexcept>
#include <string>

namespace ssa {

/// Input does not satisfy a documented precondition (bad file, unknown
/// state, out-of-range parameter). The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed on valid input (rank deficiency,
/// separation, non-finite values). The CLI maps this to exit code 2.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ssa
