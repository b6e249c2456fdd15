#include <conceptpose/error.hpp>

namespace conceptpose {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::DegenerateFrame: return "degenerate-frame";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::DegenerateSample: return "degenerate-sample";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::NoConsensus: return "no-consensus";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::UnsupportedModel: return "unsupported-model";
    case ErrorKind::Format: return "format";
    case ErrorKind::Ingestion: return "ingestion";
  }
  return "unknown";
}

}  // namespace conceptpose
