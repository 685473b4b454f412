#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dha {

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Write-to-temp then atomic rename; no partial outputs on failure.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

// Minimal CSV quoting: fields containing comma, quote, or newline get quoted.
std::string csv_field(std::string_view value);
// Splits one CSV line produced by csv_field.
std::vector<std::string> split_csv_line(const std::string& line);

std::string format_double(double v, int decimals);

}  // namespace dha
