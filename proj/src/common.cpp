#include "uaf/common.hpp"

namespace uaf {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::evaluation_failure: return "evaluation failure";
    case Errc::unsupported_order: return "unsupported order";
    case Errc::wrong_regime: return "wrong regime";
    case Errc::capability: return "capability";
    case Errc::scalar_solve: return "scalar solve";
    case Errc::inner_solver_failure: return "inner solver failure";
    case Errc::bracketing: return "bracketing";
    case Errc::invalid_config: return "invalid config";
    case Errc::parse: return "parse error";
    case Errc::integration_blowup: return "integration blowup";
    case Errc::step_size: return "step size";
    case Errc::fit: return "fit";
  }
  return "unknown";
}

}  // namespace uaf
