#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jeseme {

enum class ErrorCode {
  kEmptyCorpus,
  kInfeasibleSlicing,
  kInvalidManifest,
  kEmptyVocabulary,
  kEmptySlice,
  kUnknownWord,
  kUnknownCorpus,
  kEmptyMatrix,
  kInvalidDimension,
  kDimensionMismatch,
  kNoUsableSeeds,
  kConsistencyError,
  kInvalidArgument,
  kIoError,
  kFormatError,
};

// Name used in messages, logs and API error bodies, e.g. "UnknownWord".
std::string_view to_string(ErrorCode code);

// All library failures are reported as jeseme::Error. `subject` carries the
// offending item (word, corpus id, path) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace jeseme
