#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spex {

// Error taxonomy shared by every module. The CLI maps these onto exit codes
// and the "kind" field of its JSON diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid-argument"; }
};

class CapacityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "capacity-error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config-error"; }
};

class ProviderError : public Error {
 public:
  static constexpr std::size_t kNoBatch = static_cast<std::size_t>(-1);

  explicit ProviderError(const std::string& what, std::size_t batch = kNoBatch)
      : Error(what), batch_(batch) {}

  const char* kind() const noexcept override { return "provider-error"; }
  std::size_t batch_index() const noexcept { return batch_; }

 private:
  std::size_t batch_;
};

}  // namespace spex
