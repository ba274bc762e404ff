#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace nlos {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// FNV-1a over a byte string; used to fingerprint configurations in file
/// headers and manifests.
std::uint64_t fnv1a64(const std::string& bytes);

std::string to_hex(std::uint64_t value);

/// 1-based line number of a byte offset in a text buffer, for parse errors.
int line_of_offset(const std::string& text, std::size_t offset);

}  // namespace nlos
