#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sir::fsutil {

std::string read_file(const std::filesystem::path& path);

/// Write-temp-fsync-rename. Readers see the old or the new file, never a mix.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// fsync a directory so a rename inside it is durable.
void sync_dir(const std::filesystem::path& dir);

}  // namespace sir::fsutil
