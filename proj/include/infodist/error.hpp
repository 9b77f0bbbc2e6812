#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infodist {

/// Every failure the library reports carries one of these codes. The CLI and
/// the Python bindings expose the code name verbatim in their error objects.
enum class Errc {
  InvalidArgument,
  InvalidToken,
  PrecisionTooLow,
  InteriorEos,
  CorruptStream,
  RunawayDecode,
  ZeroProbability,
  EmptyOperand,
  DegenerateInput,
  UndefinedCorrelation,
  GroupingError,
  FormatOverflow,
  BadMagic,
  UnsupportedVersion,
  ChecksumMismatch,
  TruncatedFile,
  ModelMismatch,
  Unreachable,
  ServerFault,
  TooLong,
  Unsupported,
  ParseError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace infodist
