#include "decoysim/error.hpp"

namespace decoysim {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kUnknownSubnet: return "UnknownSubnet";
    case ErrorCode::kEmptyNetwork: return "EmptyNetwork";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kUnmappedHost: return "UnmappedHost";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kCheckFailed: return "CheckFailed";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kEmptySamples: return "EmptySamples";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kExtraction: return "ExtractionError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, std::string module, const std::string& message,
             std::vector<std::string> diagnostics)
    : std::runtime_error(message),
      code_(code),
      module_(std::move(module)),
      diagnostics_(std::move(diagnostics)) {}

std::string Error::qualified_code() const {
  return module_ + "." + std::string(error_name(code_));
}

}  // namespace decoysim
