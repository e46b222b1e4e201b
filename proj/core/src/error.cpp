#include "jeseme/error.hpp"

namespace jeseme {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInfeasibleSlicing: return "InfeasibleSlicing";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kEmptySlice: return "EmptySlice";
    case ErrorCode::kUnknownWord: return "UnknownWord";
    case ErrorCode::kUnknownCorpus: return "UnknownCorpus";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kInvalidDimension: return "InvalidDimension";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoUsableSeeds: return "NoUsableSeeds";
    case ErrorCode::kConsistencyError: return "ConsistencyError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

}  // namespace jeseme
