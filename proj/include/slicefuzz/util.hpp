#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slicefuzz {

using Bytes = std::vector<std::uint8_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
std::optional<Bytes> read_bytes(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view data);
void write_file_atomic(const std::filesystem::path& path, const Bytes& data);

std::uint64_t fnv1a64(std::string_view data);
std::string bytes_to_string(const Bytes& b);
Bytes string_to_bytes(std::string_view s);

/// Scratch directory for traces and temporary inputs (tmpfs when present).
std::filesystem::path scratch_dir();

std::string trim(std::string_view s);

}  // namespace slicefuzz
