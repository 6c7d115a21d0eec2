#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jgen {

// Writes content to path atomically (temp file in the same directory + rename).
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Reads a text file into lines (LF endings; a trailing CR is stripped).
std::vector<std::string> read_lines(const std::string& path);

// FNV-1a 64-bit, used for content hashes in manifests and checkpoints.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

std::string hex64(std::uint64_t v);

}  // namespace jgen
