#pragma once

#include <stdexcept>
#include <string>

namespace ilpcm {

// Exit-code categories used by the command line: usage = 2, data = 3,
// numerical = 4.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

int exit_code_for(const std::exception& e) noexcept;

}  // namespace ilpcm
