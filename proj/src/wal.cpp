#include "sir/wal.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"

namespace sir {

namespace {

std::uint32_t crc_of(std::string_view s) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

std::string hex8(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

}  // namespace

void AppendLog::append(std::string_view payload) const {
  std::string frame = hex8(crc_of(payload)) + " " + std::to_string(payload.size()) + " ";
  frame.append(payload);
  frame.push_back('\n');

  int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::Io, "open " + path_.string() + ": " + std::strerror(errno));
  const char* p = frame.data();
  std::size_t left = frame.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(Errc::Io, "append " + path_.string() + ": " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd) != 0) {
    ::close(fd);
    throw Error(Errc::Io, "fdatasync " + path_.string());
  }
  ::close(fd);
}

std::vector<std::string> AppendLog::replay() const {
  std::vector<std::string> records;
  if (!std::filesystem::exists(path_)) return records;
  const std::string data = fsutil::read_file(path_);
  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < data.size()) {
    // "<8 hex> <len> <payload>\n"
    if (data.size() - pos < 11 || data[pos + 8] != ' ') break;
    std::uint32_t crc = 0;
    auto [p1, ec1] = std::from_chars(data.data() + pos, data.data() + pos + 8, crc, 16);
    if (ec1 != std::errc{} || p1 != data.data() + pos + 8) break;
    std::size_t len = 0;
    const char* len_begin = data.data() + pos + 9;
    auto [p2, ec2] = std::from_chars(len_begin, data.data() + data.size(), len);
    if (ec2 != std::errc{} || p2 == len_begin || p2 >= data.data() + data.size() || *p2 != ' ') break;
    const std::size_t payload_at = static_cast<std::size_t>(p2 - data.data()) + 1;
    if (payload_at + len + 1 > data.size() || data[payload_at + len] != '\n') break;
    std::string_view payload(data.data() + payload_at, len);
    if (crc_of(payload) != crc) break;
    records.emplace_back(payload);
    pos = payload_at + len + 1;
    good_end = pos;
  }
  if (good_end < data.size()) {
    // Torn tail from a crash mid-append: the record was never acknowledged.
    if (::truncate(path_.c_str(), static_cast<off_t>(good_end)) != 0) {
      throw Error(Errc::Io, "truncate " + path_.string());
    }
  }
  return records;
}

void AppendLog::reset() const {
  int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::Io, "truncate " + path_.string() + ": " + std::strerror(errno));
  ::fsync(fd);
  ::close(fd);
}

}  // namespace sir
