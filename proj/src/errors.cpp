#include "subnet/errors.hpp"

namespace subnet {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DegenerateData: return "degenerate_data";
    case ErrorCode::Stability: return "stability";
    case ErrorCode::Identifiability: return "identifiability";
    case ErrorCode::Order: return "order";
    case ErrorCode::Invertibility: return "invertibility";
    case ErrorCode::Observability: return "observability";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::Config: return "config";
    case ErrorCode::LagMismatch: return "lag_mismatch";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Calibration: return "calibration";
    case ErrorCode::Numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace subnet
