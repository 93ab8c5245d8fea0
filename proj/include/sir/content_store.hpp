#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "sir/types.hpp"

namespace sir {

enum class ImageType { Png, Jpeg };

ImageType detect_image_type(std::string_view bytes);
std::string_view mime_type(ImageType t);

struct PageImage {
  std::string bytes;
  ImageType type = ImageType::Png;
};

/// A deck manifest plus page image bytes, as read from a deck directory.
struct DeckUpload {
  SlideDeck deck;
  std::vector<std::string> images;  // images[i] belongs to deck.pages[i]
};

/// Reads `<dir>/deck.json` and the page images it references.
DeckUpload load_deck_dir(const std::filesystem::path& dir);

/// Change-detection key for a page description.
std::string page_source_hash(std::string_view image_bytes, std::string_view extracted_text);

/// Embedded file store for decks, derived artifacts and the course.
///
/// Layout under root:
///   decks/<deck_id>/deck.json
///   decks/<deck_id>/pages/<page_no>.png|.jpg
///   decks/<deck_id>/derived/<page_no>.desc.txt
///   decks/<deck_id>/derived/<page_no>.emb.f32   (little-endian float32 x D)
///   decks/<deck_id>/derived/<page_no>.meta.json (change-detection digests)
///   course.json
///
/// Each deck is held as an immutable snapshot; writers build a new snapshot
/// under the deck's write lock and swap it in, so readers never observe a
/// half-updated page.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Overwriting keeps the description and embedding of every page whose
  /// image and text are unchanged.
  std::string put_deck(const DeckUpload& upload, bool overwrite = false);
  std::string import_deck_dir(const std::filesystem::path& dir, bool overwrite = false);

  SlidePage get_page(const std::string& deck_id, int page_no) const;
  SlideDeck get_deck(const std::string& deck_id) const;
  bool has_deck(const std::string& deck_id) const;
  std::vector<std::string> deck_ids() const;
  PageImage page_image(const std::string& deck_id, int page_no) const;

  /// Resolves a range to (deck_id lexicographic, page_no ascending) order.
  std::vector<PageRef> list_pages(const RetrievalRange& range) const;

  void set_description(const PageRef& ref, std::string description,
                       std::string source_hash);
  /// Requires a description to be present; stores the vector as given
  /// after checking it has unit norm.
  void set_embedding(const PageRef& ref, std::vector<float> embedding,
                     std::string embed_input_hash);

  /// Digest of a page's stored embedding, or empty if it has none.
  std::string embedding_digest(const PageRef& ref) const;

  void put_course(Course course);
  /// Throws NotFound when no course has been loaded.
  std::shared_ptr<const Course> course() const;
  bool has_course() const;

  /// Re-checks every stored invariant; throws Error(Integrity) on violation.
  void check_invariants() const;

 private:
  struct DeckState {
    SlideDeck deck;
    std::vector<std::string> embedding_digests;  // per page, "" if absent
  };
  struct DeckSlot {
    std::mutex write_mu;
  };

  std::shared_ptr<const DeckState> snapshot(const std::string& deck_id) const;
  DeckSlot& slot(const std::string& deck_id);
  std::filesystem::path deck_dir(const std::string& deck_id) const;
  void load_from_disk();
  void write_manifest(const SlideDeck& deck) const;
  void write_meta(const SlidePage& page) const;
  template <class Fn>
  void update_page(const PageRef& ref, Fn&& fn);

  std::filesystem::path root_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const DeckState>> decks_;
  std::map<std::string, std::unique_ptr<DeckSlot>> slots_;
  std::shared_ptr<const Course> course_;
};

/// Checks that every question's retrieval range resolves against the store.
void check_course_integrity(const Course& course, const ContentStore& store);

}  // namespace sir
