#include "wmr/error.hpp"

namespace wmr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kSingularPath: return "singular-path";
    case ErrorCode::kDegenerateZoning: return "degenerate-zoning";
    case ErrorCode::kDegenerateFiring: return "degenerate-firing";
    case ErrorCode::kUncertaintyTooWide: return "uncertainty-too-wide";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace wmr
