#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decoysim {

enum class ErrorCode {
  kParse,
  kValidation,
  kUnknownSubnet,
  kEmptyNetwork,
  kSchema,
  kUnknownAction,
  kUnmappedHost,
  kShapeMismatch,
  kNonFiniteLoss,
  kCheckFailed,
  kChecksumMismatch,
  kEmptySamples,
  kTransport,
  kExtraction,
  kIo,
  kInvalidArgument,
};

// Error name without module prefix, e.g. "SchemaError".
std::string_view error_name(ErrorCode code);

// Every failure raised by the library. `module()` names the subsystem that
// raised it so the CLI can print codes like "rewards.SchemaError".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        std::vector<std::string> diagnostics = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::vector<std::string>& diagnostics() const noexcept {
    return diagnostics_;
  }
  std::string qualified_code() const;

 private:
  ErrorCode code_;
  std::string module_;
  std::vector<std::string> diagnostics_;
};

}  // namespace decoysim
