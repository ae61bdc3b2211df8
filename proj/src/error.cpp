#include "specquant/error.hpp"

namespace specquant {

std::string_view error_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfiguration: return "config";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kDegenerateGas: return "degenerate-gas";
    case ErrorCode::kDegenerateLibrary: return "degenerate-library";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kBound: return "bound";
    case ErrorCode::kUnderdetermined: return "underdetermined";
    case ErrorCode::kConditioning: return "conditioning";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kFingerprint: return "fingerprint";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) {
  return code == ErrorCode::kConditioning || code == ErrorCode::kConvergence ||
         code == ErrorCode::kDegenerateLibrary;
}

}  // namespace specquant
