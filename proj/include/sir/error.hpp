#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sir {

enum class Errc {
  DuplicateDeck,
  EmptyDeck,
  NotFound,
  UnknownDeck,
  UnknownQuestion,
  InvalidArgument,
  InvalidImage,
  MissingDescription,
  EmptyInput,
  ProviderFailure,
  IncompleteCorpus,
  DimensionMismatch,
  EmptyRetrieval,
  EmptyResponse,
  AlreadyAssigned,
  PhaseViolation,
  IncompleteResponses,
  OutOfRange,
  TooFewSamples,
  DegenerateData,
  EmptyCell,
  Io,
  Parse,
  Integrity,
  Unavailable,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, bool retryable = false)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        retryable_(retryable) {}

  Errc code() const noexcept { return code_; }
  // Provider failures that may succeed when repeated (timeouts, 5xx).
  bool retryable() const noexcept { return retryable_; }

 private:
  Errc code_;
  bool retryable_;
};

}  // namespace sir
