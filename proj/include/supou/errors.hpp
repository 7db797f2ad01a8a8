#pragma once

#include <stdexcept>
#include <string>

namespace supou {

// Exit-code mapping used by the CLI: 2 usage, 3 numeric, 4 resource.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature / root-finding / ODE failure; carries the achieved tolerance in the message.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caps exceeded (particle cap, iteration guards). Partial state is left valid.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace supou
