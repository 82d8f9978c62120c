#pragma once

#include <stdexcept>
#include <string>

namespace kinetgan {

// Data/validation failure. CLI maps this to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kinetgan
