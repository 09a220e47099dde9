#pragma once

#include <stdexcept>
#include <string>

namespace spoofbench {

// Exit-code classes used by the command line front end.
// 1: bad flags / config, 2: bad input data, 3: numerical failure.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spoofbench
