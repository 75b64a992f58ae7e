#pragma once

#include <stdexcept>

namespace epw {

/// I/O failure: missing file, short read, bad magic. The CLI maps this to exit code 2.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure: CFL violation, reaction overflow, singular system, non-finite state.
/// The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace epw
