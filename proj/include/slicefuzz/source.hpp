#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace slicefuzz {

using FileId = std::uint32_t;

/// A byte range inside one indexed source file. Lines are 1-based and
/// inclusive; bytes are half-open [start_byte, end_byte).
struct FileRange {
  FileId file_id = 0;
  std::uint32_t start_byte = 0;
  std::uint32_t end_byte = 0;
  std::uint32_t start_line = 0;
  std::uint32_t end_line = 0;

  bool empty() const { return start_byte == end_byte; }
  std::uint32_t size() const { return end_byte - start_byte; }

  bool contains(const FileRange& other) const {
    return file_id == other.file_id && start_byte <= other.start_byte &&
           other.end_byte <= end_byte;
  }
  bool contains_byte(FileId file, std::uint32_t byte) const {
    return file == file_id && start_byte <= byte && byte < end_byte;
  }
  bool contains_line(FileId file, std::uint32_t line) const {
    return file == file_id && start_line <= line && line <= end_line;
  }

  friend bool operator==(const FileRange&, const FileRange&) = default;
  friend auto operator<=>(const FileRange& a, const FileRange& b) {
    if (auto c = a.file_id <=> b.file_id; c != 0) return c;
    if (auto c = a.start_byte <=> b.start_byte; c != 0) return c;
    return a.end_byte <=> b.end_byte;
  }
};

class SourceFile {
 public:
  SourceFile(FileId id, std::string path, std::string content);

  /// Reads a file from disk; UTF-8 is kept as is, other bytes pass through
  /// untouched (Latin-1 sources index the same way).
  static std::shared_ptr<const SourceFile> load(FileId id,
                                                const std::string& path);

  FileId id() const { return id_; }
  const std::string& path() const { return path_; }
  const std::string& name() const { return name_; }
  const std::string& content() const { return content_; }
  std::uint64_t content_hash() const { return hash_; }

  std::uint32_t line_of(std::uint32_t byte) const;
  std::uint32_t line_count() const {
    return static_cast<std::uint32_t>(line_starts_.size());
  }
  std::uint32_t line_start(std::uint32_t line) const;
  std::uint32_t line_end(std::uint32_t line) const;

  FileRange range(std::uint32_t start_byte, std::uint32_t end_byte) const;
  std::string_view text(const FileRange& r) const {
    return std::string_view(content_).substr(r.start_byte, r.size());
  }

 private:
  FileId id_;
  std::string path_;
  std::string name_;
  std::string content_;
  std::uint64_t hash_ = 0;
  std::vector<std::uint32_t> line_starts_;
};

using SourcePtr = std::shared_ptr<const SourceFile>;

}  // namespace slicefuzz
