#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace e2o::io {

/// Lowercase hex SHA-1 of raw bytes.
std::string sha1_hex(std::span<const std::uint8_t> bytes);

/// Git blob object id: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_id(std::span<const std::uint8_t> bytes);
std::string git_blob_id_of_file(const std::filesystem::path& path);

}  // namespace e2o::io
