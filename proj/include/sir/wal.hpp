#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sir {

/// Append-only record log. Each record is framed as
///   <crc32 as 8 hex digits> <payload length> <payload>\n
/// and fdatasync'ed before append() returns. Replay stops at the first
/// torn or corrupt frame and cuts the file back to the last good record.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path) : path_(std::move(path)) {}

  void append(std::string_view payload) const;
  std::vector<std::string> replay() const;
  /// Empties the log (after its contents were captured in a snapshot).
  void reset() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace sir
