#pragma once

#include <stdexcept>
#include <string>

namespace subnet {

// Every failure mode carries a stable code so the C API can translate
// exceptions into status codes without string matching.
enum class ErrorCode {
  Io = 1,
  Schema,          // CSV/JSON structure wrong (missing column, bad field)
  Parse,           // unparseable cell / malformed JSON
  InvalidArgument,
  DegenerateData,  // constant channel, zero output variance
  Stability,       // unstable linear block where stability is required
  Identifiability, // subspace step cannot separate signal directions
  Order,           // requested order exceeds detected rank
  Invertibility,   // A not invertible (reconstructability maps)
  Observability,   // rank(ca_map) < n_x
  Dimension,       // matrix/vector size mismatch
  Config,          // inconsistent configuration (missing BLA, bad scheme)
  LagMismatch,     // encoder window lengths disagree with maps
  Divergence,      // non-finite trajectory or loss
  Calibration,     // calibration failed to reach the target
  Numeric,         // non-finite intermediate in a computation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

const char* error_code_name(ErrorCode code);

}  // namespace subnet
