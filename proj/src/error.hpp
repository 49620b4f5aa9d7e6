#pragma once

#include <stdexcept>
#include <string>

namespace orchard {

enum class Errc {
  invalid_argument,
  domain,
  parse,
  io,
  no_data,
  singular_fit,
  not_found,
  out_of_range,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace orchard
