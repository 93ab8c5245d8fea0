#include "sir/error.hpp"

namespace sir {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateDeck: return "DuplicateDeck";
    case Errc::EmptyDeck: return "EmptyDeck";
    case Errc::NotFound: return "NotFound";
    case Errc::UnknownDeck: return "UnknownDeck";
    case Errc::UnknownQuestion: return "UnknownQuestion";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidImage: return "InvalidImage";
    case Errc::MissingDescription: return "MissingDescription";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ProviderFailure: return "ProviderFailure";
    case Errc::IncompleteCorpus: return "IncompleteCorpus";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyRetrieval: return "EmptyRetrieval";
    case Errc::EmptyResponse: return "EmptyResponse";
    case Errc::AlreadyAssigned: return "AlreadyAssigned";
    case Errc::PhaseViolation: return "PhaseViolation";
    case Errc::IncompleteResponses: return "IncompleteResponses";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::EmptyCell: return "EmptyCell";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::Integrity: return "Integrity";
    case Errc::Unavailable: return "Unavailable";
  }
  return "Unknown";
}

}  // namespace sir
