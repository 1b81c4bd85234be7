#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nsvqa {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Parses a whole-file JSON document; syntax errors become MalformedFile.
nlohmann::ordered_json parse_json(std::string_view text, std::string_view origin);

/// One JSON object per non-blank line.
std::vector<nlohmann::ordered_json> parse_json_lines(std::string_view text,
                                                     std::string_view origin);

std::string dump_json_lines(const std::vector<nlohmann::ordered_json>& records);

}  // namespace nsvqa
