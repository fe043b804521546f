#include "slicefuzz/source.hpp"

#include <algorithm>
#include <filesystem>

#include "slicefuzz/util.hpp"

namespace slicefuzz {

SourceFile::SourceFile(FileId id, std::string path, std::string content)
    : id_(id), path_(std::move(path)), content_(std::move(content)) {
  name_ = std::filesystem::path(path_).filename().string();
  hash_ = fnv1a64(content_);
  line_starts_.push_back(0);
  for (std::uint32_t i = 0; i < content_.size(); ++i)
    if (content_[i] == '\n' && i + 1 < content_.size())
      line_starts_.push_back(i + 1);
}

std::shared_ptr<const SourceFile> SourceFile::load(FileId id,
                                                   const std::string& path) {
  return std::make_shared<const SourceFile>(id, path, read_text_file(path));
}

std::uint32_t SourceFile::line_of(std::uint32_t byte) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), byte);
  return static_cast<std::uint32_t>(it - line_starts_.begin());
}

std::uint32_t SourceFile::line_start(std::uint32_t line) const {
  if (line == 0 || line > line_starts_.size()) return 0;
  return line_starts_[line - 1];
}

std::uint32_t SourceFile::line_end(std::uint32_t line) const {
  if (line >= line_starts_.size())
    return static_cast<std::uint32_t>(content_.size());
  return line_starts_[line] - 1;
}

FileRange SourceFile::range(std::uint32_t start_byte,
                            std::uint32_t end_byte) const {
  FileRange r;
  r.file_id = id_;
  r.start_byte = start_byte;
  r.end_byte = end_byte;
  r.start_line = line_of(start_byte);
  r.end_line = end_byte > start_byte ? line_of(end_byte - 1) : r.start_line;
  return r;
}

}  // namespace slicefuzz
