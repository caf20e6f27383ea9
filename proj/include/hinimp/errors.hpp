#pragma once

#include <stdexcept>
#include <string>

namespace hinimp {

// CLI exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hinimp
