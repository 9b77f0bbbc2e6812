#include "infodist/error.hpp"

namespace infodist {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidToken: return "InvalidToken";
    case Errc::PrecisionTooLow: return "PrecisionTooLow";
    case Errc::InteriorEos: return "InteriorEos";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::RunawayDecode: return "RunawayDecode";
    case Errc::ZeroProbability: return "ZeroProbability";
    case Errc::EmptyOperand: return "EmptyOperand";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::UndefinedCorrelation: return "UndefinedCorrelation";
    case Errc::GroupingError: return "GroupingError";
    case Errc::FormatOverflow: return "FormatOverflow";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::ModelMismatch: return "ModelMismatch";
    case Errc::Unreachable: return "Unreachable";
    case Errc::ServerFault: return "ServerFault";
    case Errc::TooLong: return "TooLong";
    case Errc::Unsupported: return "Unsupported";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace infodist
