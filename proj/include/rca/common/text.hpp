#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace rca
