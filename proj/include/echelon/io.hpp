#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace echelon {

// Shortest decimal form that round-trips to the same double, '.' separator,
// locale-independent. Used for every numeric cell we write.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

// Creates parent directories as needed; replaces the file atomically enough
// for our purposes (write then rename is not required by the tests).
void write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex64(std::uint64_t value);

// Current time as e.g. 2026-03-14T09:26:53Z.
std::string timestamp_utc();

}  // namespace echelon
