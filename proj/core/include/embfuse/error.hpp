#pragma once

#include <stdexcept>
#include <string>

namespace embfuse {

// Every failure surfaced by the library carries a stable machine-readable
// code ("empty-corpus", "no-shared-vocab", ...) next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace embfuse
