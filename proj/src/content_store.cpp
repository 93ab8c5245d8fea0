#include "sir/content_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"
#include "sir/hash.hpp"
#include "sir/json_io.hpp"

namespace sir {

namespace fs = std::filesystem;

ImageType detect_image_type(std::string_view bytes) {
  static constexpr std::string_view kPng = "\x89PNG\r\n\x1a\n";
  if (bytes.substr(0, kPng.size()) == kPng) return ImageType::Png;
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF) {
    return ImageType::Jpeg;
  }
  throw Error(Errc::InvalidImage, "page image is neither PNG nor JPEG");
}

std::string_view mime_type(ImageType t) {
  return t == ImageType::Png ? "image/png" : "image/jpeg";
}

namespace {

std::string_view extension(ImageType t) { return t == ImageType::Png ? ".png" : ".jpg"; }

void check_deck_id(const std::string& id) {
  if (id.empty() || id == "." || id == ".." ||
      id.find_first_of("/\\") != std::string::npos || id.find('\0') != std::string::npos) {
    throw Error(Errc::InvalidArgument, "invalid deck id '" + id + "'");
  }
}

std::string encode_f32(std::span<const float> v) {
  std::string out;
  out.reserve(v.size() * 4);
  for (float f : v) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  return out;
}

std::vector<float> decode_f32(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw Error(Errc::Parse, "embedding file length not a multiple of 4");
  std::vector<float> v(bytes.size() / 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    }
    v[i] = std::bit_cast<float>(bits);
  }
  return v;
}

double l2_norm(std::span<const float> v) {
  double s = 0;
  for (float f : v) s += static_cast<double>(f) * f;
  return std::sqrt(s);
}

std::string digest_of(const std::optional<std::vector<float>>& emb) {
  if (!emb) return {};
  return Hasher{}.add(std::span<const float>(*emb)).hex();
}

json manifest_json(const SlideDeck& deck) {
  json pages = json::array();
  for (const auto& p : deck.pages) {
    pages.push_back({{"page_no", p.page_no}, {"image", p.image_ref}, {"text", p.extracted_text}});
  }
  return json{{"deck_id", deck.deck_id},
              {"title", deck.title},
              {"source_uri", deck.source_uri},
              {"pages", pages}};
}

SlideDeck parse_manifest(const json& j) {
  SlideDeck deck;
  deck.deck_id = j.at("deck_id").get<std::string>();
  deck.title = j.value("title", "");
  deck.source_uri = j.value("source_uri", "");
  for (const auto& pj : j.at("pages")) {
    SlidePage p;
    p.deck_id = deck.deck_id;
    p.page_no = pj.at("page_no").get<int>();
    p.image_ref = pj.at("image").get<std::string>();
    p.extracted_text = pj.value("text", "");
    deck.pages.push_back(std::move(p));
  }
  return deck;
}

}  // namespace

DeckUpload load_deck_dir(const fs::path& dir) {
  json j;
  try {
    j = json::parse(fsutil::read_file(dir / "deck.json"));
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, "deck.json: " + std::string(e.what()));
  }
  DeckUpload up;
  try {
    up.deck = parse_manifest(j);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, "deck.json: " + std::string(e.what()));
  }
  up.deck.source_uri = fs::absolute(dir).lexically_normal().string();
  for (const auto& p : up.deck.pages) {
    up.images.push_back(fsutil::read_file(dir / p.image_ref));
  }
  return up;
}

ContentStore::ContentStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "decks");
  load_from_disk();
}

fs::path ContentStore::deck_dir(const std::string& deck_id) const {
  return root_ / "decks" / deck_id;
}

void ContentStore::load_from_disk() {
  for (const auto& entry : fs::directory_iterator(root_ / "decks")) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "deck.json")) continue;
    auto state = std::make_shared<DeckState>();
    state->deck = parse_manifest(json::parse(fsutil::read_file(entry.path() / "deck.json")));
    for (auto& page : state->deck.pages) {
      auto derived = entry.path() / "derived";
      auto stem = std::to_string(page.page_no);
      if (fs::exists(derived / (stem + ".desc.txt"))) {
        page.vision_description = fsutil::read_file(derived / (stem + ".desc.txt"));
      }
      if (fs::exists(derived / (stem + ".emb.f32"))) {
        page.embedding = decode_f32(fsutil::read_file(derived / (stem + ".emb.f32")));
      }
      if (fs::exists(derived / (stem + ".meta.json"))) {
        auto meta = json::parse(fsutil::read_file(derived / (stem + ".meta.json")));
        page.source_hash = meta.value("source_hash", "");
        page.embed_input_hash = meta.value("embed_input_hash", "");
      }
      state->embedding_digests.push_back(digest_of(page.embedding));
    }
    slots_[state->deck.deck_id] = std::make_unique<DeckSlot>();
    decks_[state->deck.deck_id] = std::move(state);
  }
  if (fs::exists(root_ / "course.json")) {
    auto course = json::parse(fsutil::read_file(root_ / "course.json")).get<Course>();
    validate_course_shape(course);
    course_ = std::make_shared<const Course>(std::move(course));
    try {
      check_course_integrity(*course_, *this);
    } catch (const Error& e) {
      throw Error(Errc::Integrity, std::string("stored course: ") + e.what());
    }
  }
}

std::shared_ptr<const ContentStore::DeckState> ContentStore::snapshot(
    const std::string& deck_id) const {
  std::shared_lock lock(mu_);
  auto it = decks_.find(deck_id);
  if (it == decks_.end()) return nullptr;
  return it->second;
}

ContentStore::DeckSlot& ContentStore::slot(const std::string& deck_id) {
  std::unique_lock lock(mu_);
  auto& s = slots_[deck_id];
  if (!s) s = std::make_unique<DeckSlot>();
  return *s;
}

void ContentStore::write_manifest(const SlideDeck& deck) const {
  fsutil::write_file_atomic(deck_dir(deck.deck_id) / "deck.json", manifest_json(deck).dump(2));
}

void ContentStore::write_meta(const SlidePage& page) const {
  json meta{{"source_hash", page.source_hash}, {"embed_input_hash", page.embed_input_hash}};
  fsutil::write_file_atomic(
      deck_dir(page.deck_id) / "derived" / (std::to_string(page.page_no) + ".meta.json"),
      meta.dump());
}

std::string page_source_hash(std::string_view image_bytes, std::string_view extracted_text) {
  return Hasher{}.add(image_bytes).add(extracted_text).hex();
}

std::string ContentStore::put_deck(const DeckUpload& upload, bool overwrite) {
  const auto& in = upload.deck;
  check_deck_id(in.deck_id);
  if (in.pages.empty()) throw Error(Errc::EmptyDeck, "deck '" + in.deck_id + "' has no pages");
  if (upload.images.size() != in.pages.size()) {
    throw Error(Errc::InvalidArgument, "one image per page required");
  }

  // Order pages by page_no and require 1..n.
  std::vector<std::size_t> order(in.pages.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return in.pages[a].page_no < in.pages[b].page_no; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (in.pages[order[i]].page_no != static_cast<int>(i) + 1) {
      throw Error(Errc::InvalidArgument,
                  "page numbers of deck '" + in.deck_id + "' must be contiguous from 1");
    }
  }
  std::vector<ImageType> types;
  for (auto idx : order) types.push_back(detect_image_type(upload.images[idx]));

  auto& deck_slot = slot(in.deck_id);
  std::lock_guard write_lock(deck_slot.write_mu);
  auto previous = snapshot(in.deck_id);
  if (previous) {
    if (!overwrite) throw Error(Errc::DuplicateDeck, "deck '" + in.deck_id + "' already stored");
    {
      std::unique_lock lock(mu_);
      decks_.erase(in.deck_id);
    }
  }
  const auto dir = deck_dir(in.deck_id);
  fs::remove_all(dir);

  auto state = std::make_shared<DeckState>();
  state->deck.deck_id = in.deck_id;
  state->deck.title = in.title;
  state->deck.source_uri = in.source_uri;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& src = in.pages[order[i]];
    SlidePage page;
    page.deck_id = in.deck_id;
    page.page_no = src.page_no;
    page.image_ref = "pages/" + std::to_string(page.page_no) + std::string(extension(types[i]));
    page.extracted_text = src.extracted_text;
    fsutil::write_file_atomic(dir / page.image_ref, upload.images[order[i]]);
    std::string digest;
    if (previous && i < previous->deck.pages.size()) {
      const auto& old = previous->deck.pages[i];
      if (old.vision_description &&
          old.source_hash == page_source_hash(upload.images[order[i]], page.extracted_text)) {
        const auto derived = dir / "derived" / std::to_string(page.page_no);
        page.vision_description = old.vision_description;
        page.source_hash = old.source_hash;
        fsutil::write_file_atomic(derived.string() + ".desc.txt", *page.vision_description);
        if (old.embedding) {
          page.embedding = old.embedding;
          page.embed_input_hash = old.embed_input_hash;
          digest = previous->embedding_digests[i];
          fsutil::write_file_atomic(derived.string() + ".emb.f32", encode_f32(*page.embedding));
        }
        write_meta(page);
      }
    }
    state->deck.pages.push_back(std::move(page));
    state->embedding_digests.push_back(std::move(digest));
  }
  // The manifest is written last: its presence marks the deck as stored.
  write_manifest(state->deck);

  std::unique_lock lock(mu_);
  decks_[in.deck_id] = std::move(state);
  return in.deck_id;
}

std::string ContentStore::import_deck_dir(const fs::path& dir, bool overwrite) {
  return put_deck(load_deck_dir(dir), overwrite);
}

bool ContentStore::has_deck(const std::string& deck_id) const {
  std::shared_lock lock(mu_);
  return decks_.count(deck_id) != 0;
}

std::vector<std::string> ContentStore::deck_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : decks_) out.push_back(id);
  return out;
}

SlideDeck ContentStore::get_deck(const std::string& deck_id) const {
  auto s = snapshot(deck_id);
  if (!s) throw Error(Errc::NotFound, "deck '" + deck_id + "'");
  return s->deck;
}

SlidePage ContentStore::get_page(const std::string& deck_id, int page_no) const {
  auto s = snapshot(deck_id);
  if (!s) throw Error(Errc::NotFound, "deck '" + deck_id + "'");
  if (page_no < 1 || page_no > static_cast<int>(s->deck.pages.size())) {
    throw Error(Errc::NotFound, "page " + std::to_string(page_no) + " of deck '" + deck_id + "'");
  }
  return s->deck.pages[static_cast<std::size_t>(page_no - 1)];
}

PageImage ContentStore::page_image(const std::string& deck_id, int page_no) const {
  auto page = get_page(deck_id, page_no);
  PageImage img;
  img.bytes = fsutil::read_file(deck_dir(deck_id) / page.image_ref);
  img.type = detect_image_type(img.bytes);
  return img;
}

std::string ContentStore::embedding_digest(const PageRef& ref) const {
  auto s = snapshot(ref.deck_id);
  if (!s || ref.page_no < 1 || ref.page_no > static_cast<int>(s->deck.pages.size())) {
    throw Error(Errc::NotFound, "page " + std::to_string(ref.page_no) + " of deck '" + ref.deck_id + "'");
  }
  return s->embedding_digests[static_cast<std::size_t>(ref.page_no - 1)];
}

std::vector<PageRef> ContentStore::list_pages(const RetrievalRange& range) const {
  if (range.decks.empty()) throw Error(Errc::InvalidArgument, "empty retrieval range");
  std::set<PageRef> pages;
  for (const auto& w : range.decks) {
    auto s = snapshot(w.deck_id);
    if (!s) throw Error(Errc::UnknownDeck, "deck '" + w.deck_id + "' in retrieval range");
    const int n = static_cast<int>(s->deck.pages.size());
    const int first = std::max(1, w.first_page.value_or(1));
    const int last = std::min(n, w.last_page.value_or(n));
    if (w.first_page && w.last_page && *w.first_page > *w.last_page) {
      throw Error(Errc::InvalidArgument, "inverted page window for deck '" + w.deck_id + "'");
    }
    for (int p = first; p <= last; ++p) pages.insert({w.deck_id, p});
  }
  return {pages.begin(), pages.end()};
}

template <class Fn>
void ContentStore::update_page(const PageRef& ref, Fn&& fn) {
  auto& deck_slot = slot(ref.deck_id);
  std::lock_guard write_lock(deck_slot.write_mu);
  auto current = snapshot(ref.deck_id);
  if (!current) throw Error(Errc::NotFound, "deck '" + ref.deck_id + "'");
  if (ref.page_no < 1 || ref.page_no > static_cast<int>(current->deck.pages.size())) {
    throw Error(Errc::NotFound, "page " + std::to_string(ref.page_no) + " of deck '" + ref.deck_id + "'");
  }
  auto next = std::make_shared<DeckState>(*current);
  const auto idx = static_cast<std::size_t>(ref.page_no - 1);
  fn(next->deck.pages[idx], next->embedding_digests[idx]);
  std::unique_lock lock(mu_);
  decks_[ref.deck_id] = std::move(next);
}

void ContentStore::set_description(const PageRef& ref, std::string description,
                                   std::string source_hash) {
  if (description.empty()) throw Error(Errc::EmptyInput, "empty vision description");
  update_page(ref, [&](SlidePage& page, std::string&) {
    fsutil::write_file_atomic(
        deck_dir(ref.deck_id) / "derived" / (std::to_string(ref.page_no) + ".desc.txt"),
        description);
    page.vision_description = std::move(description);
    page.source_hash = std::move(source_hash);
    write_meta(page);
  });
}

void ContentStore::set_embedding(const PageRef& ref, std::vector<float> embedding,
                                 std::string embed_input_hash) {
  if (embedding.empty()) throw Error(Errc::InvalidArgument, "empty embedding");
  if (std::abs(l2_norm(embedding) - 1.0) > 1e-6) {
    throw Error(Errc::InvalidArgument, "embedding is not unit-norm");
  }
  update_page(ref, [&](SlidePage& page, std::string& digest) {
    if (!page.vision_description) {
      throw Error(Errc::MissingDescription,
                  "page " + std::to_string(ref.page_no) + " of deck '" + ref.deck_id + "'");
    }
    fsutil::write_file_atomic(
        deck_dir(ref.deck_id) / "derived" / (std::to_string(ref.page_no) + ".emb.f32"),
        encode_f32(embedding));
    page.embedding = std::move(embedding);
    page.embed_input_hash = std::move(embed_input_hash);
    digest = digest_of(page.embedding);
    write_meta(page);
  });
}

void ContentStore::put_course(Course course) {
  validate_course_shape(course);
  check_course_integrity(course, *this);
  fsutil::write_file_atomic(root_ / "course.json", json(course).dump(2));
  auto next = std::make_shared<const Course>(std::move(course));
  std::unique_lock lock(mu_);
  course_ = std::move(next);
}

std::shared_ptr<const Course> ContentStore::course() const {
  std::shared_lock lock(mu_);
  if (!course_) throw Error(Errc::NotFound, "no course loaded");
  return course_;
}

bool ContentStore::has_course() const {
  std::shared_lock lock(mu_);
  return course_ != nullptr;
}

void ContentStore::check_invariants() const {
  for (const auto& id : deck_ids()) {
    auto s = snapshot(id);
    if (!s) continue;
    const auto& pages = s->deck.pages;
    if (pages.empty()) throw Error(Errc::Integrity, "deck '" + id + "' has no pages");
    for (std::size_t i = 0; i < pages.size(); ++i) {
      const auto& p = pages[i];
      const auto where = "deck '" + id + "' page " + std::to_string(p.page_no);
      if (p.page_no != static_cast<int>(i) + 1) throw Error(Errc::Integrity, where + ": non-contiguous");
      if (p.embedding && !p.vision_description) {
        throw Error(Errc::Integrity, where + ": embedding without description");
      }
      if (p.embedding && std::abs(l2_norm(*p.embedding) - 1.0) > 1e-6) {
        throw Error(Errc::Integrity, where + ": embedding not unit-norm");
      }
    }
  }
  if (has_course()) check_course_integrity(*course(), *this);
}

void check_course_integrity(const Course& course, const ContentStore& store) {
  for (const auto& q : course.questions) {
    std::vector<PageRef> pages;
    try {
      pages = store.list_pages(q.retrieval_range);
    } catch (const Error& e) {
      throw Error(Errc::UnknownDeck, "question '" + q.question_id + "': " + e.what());
    }
    if (pages.empty()) {
      throw Error(Errc::InvalidArgument,
                  "question '" + q.question_id + "': retrieval range resolves to no pages");
    }
  }
}

}  // namespace sir
