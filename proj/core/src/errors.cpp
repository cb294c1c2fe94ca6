#include "ergolab/errors.hpp"

namespace ergolab {

const char* to_string(errc code) noexcept {
  switch (code) {
    case errc::invalid_input: return "invalid-input";
    case errc::degenerate_period: return "degenerate-period";
    case errc::perturbation_too_large: return "perturbation-too-large";
    case errc::tree_budget: return "tree-budget";
    case errc::hyperbolicity_loss: return "hyperbolicity-loss";
    case errc::empty_ball: return "empty-ball";
    case errc::parse_error: return "parse-error";
    case errc::validation_error: return "validation-error";
    case errc::numerical_error: return "numerical-error";
  }
  return "error";
}

}  // namespace ergolab
