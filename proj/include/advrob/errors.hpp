#pragma once

#include <stdexcept>

namespace advrob {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError  -> exit 2  (bad flags, bad config file, invalid settings)
//   DataError    -> exit 3  (missing/malformed input data)
//   NumericError -> exit 4  (internal invariant or numeric check failed)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace advrob
