#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

enum class errc {
  invalid_input,
  degenerate_period,
  perturbation_too_large,
  tree_budget,
  hyperbolicity_loss,
  empty_ball,
  parse_error,
  validation_error,
  numerical_error,
};

const char* to_string(errc code) noexcept;

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

// Exit-code mapping used by the CLI: 2 = bad input, 3 = numerical trouble.
inline int exit_code_for(errc code) noexcept {
  switch (code) {
    case errc::invalid_input:
    case errc::parse_error:
    case errc::validation_error:
      return 2;
    default:
      return 3;
  }
}

}  // namespace ergolab
