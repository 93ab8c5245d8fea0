#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sir/content_store.hpp"
#include "sir/providers.hpp"

namespace sir {

struct PageFailure {
  PageRef page;
  std::string error;
};

struct IngestReport {
  std::size_t pages_described = 0;
  std::size_t pages_embedded = 0;
  std::size_t cache_hits = 0;  // pages whose description and embedding were both current
  std::vector<PageFailure> failures;
};

struct IngestOptions {
  std::size_t max_inflight = 4;
};

/// The text a page embedding is computed from: extracted text, newline, description.
std::string embedding_input(const SlidePage& page);

/// L2-normalizes in double precision. Throws DegenerateData on a zero vector.
std::vector<float> normalize(std::vector<float> v);

/// Generates and persists the vision description. A page whose image and
/// text are unchanged since the last description is left alone without a
/// provider call. Provider errors propagate and leave the page as it was.
SlidePage describe_page(ContentStore& store, const PageRef& ref, VisionProvider& vp);

/// Embeds extracted text + description. Throws MissingDescription when the
/// page has not been described yet. Skips the call when the input is unchanged.
SlidePage embed_page(ContentStore& store, const PageRef& ref, EmbeddingProvider& ep);

/// Unit vector for the question prompt (options are not embedded).
std::vector<float> embed_question(const Question& q, EmbeddingProvider& ep);

/// Describes and embeds every page of a stored deck with up to
/// opts.max_inflight pages in flight. Failed pages are listed in the report;
/// all others stay persisted.
IngestReport ingest_deck(ContentStore& store, const std::string& deck_id, VisionProvider& vp,
                         EmbeddingProvider& ep, const IngestOptions& opts = {});

}  // namespace sir
