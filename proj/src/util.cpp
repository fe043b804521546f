#include "slicefuzz/util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace slicefuzz {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Bytes> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) return std::nullopt;
  auto size = in.tellg();
  if (size < 0) return std::nullopt;
  Bytes out(static_cast<std::size_t>(size));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(out.data()), size);
  if (in.gcount() != size) return std::nullopt;
  return out;
}

namespace {

std::atomic<std::uint64_t> g_tmp_counter{0};

void write_raw_atomic(const fs::path& path, const char* data, size_t size) {
  fs::path tmp = path;
  tmp += fmt::format(".tmp.{}.{}", ::getpid(), g_tmp_counter++);
  {
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw Error(fmt::format("cannot write {}", tmp.string()));
    size_t off = 0;
    while (off < size) {
      ssize_t n = ::write(fd, data + off, size - off);
      if (n < 0) {
        ::close(fd);
        throw Error(fmt::format("write failed for {}", tmp.string()));
      }
      off += static_cast<size_t>(n);
    }
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(fmt::format("rename into {} failed", path.string()));
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view data) {
  write_raw_atomic(path, data.data(), data.size());
}

void write_file_atomic(const fs::path& path, const Bytes& data) {
  write_raw_atomic(path, reinterpret_cast<const char*>(data.data()),
                   data.size());
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string bytes_to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

Bytes string_to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path base = fs::exists("/dev/shm") ? fs::path("/dev/shm")
                                           : fs::temp_directory_path();
    fs::path d = base / fmt::format("slicefuzz-{}", ::getpid());
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace slicefuzz
