#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ved {

/// Writes values as little-endian IEEE-754 binary32, in the given order.
void write_f32le(const std::filesystem::path& path, std::span<const float> values);
/// Reads exactly `count` little-endian binary32 values.
std::vector<float> read_f32le(const std::filesystem::path& path, std::size_t count);

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path, std::size_t count);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ved
