#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adaphrase {

// Writes to "<path>.tmp" and renames over `path`. IoError on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Fixed two-decimal display, rounding half away from zero on the exact
// binary value of x (0.125 -> "0.13", 0.745 == 0.74499... -> "0.74").
std::string format_2dp(double x);

std::vector<std::string_view> split_tabs(std::string_view line);

// Parses a finite double; false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

std::uint32_t crc32_text(std::string_view text);

}  // namespace adaphrase
