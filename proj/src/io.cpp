#include "nsvqa/io.hpp"

#include <fstream>
#include <sstream>

#include "nsvqa/error.hpp"

namespace nsvqa {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

nlohmann::ordered_json parse_json(std::string_view text, std::string_view origin) {
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, std::string(origin) + ": " + e.what());
  }
}

std::vector<nlohmann::ordered_json> parse_json_lines(std::string_view text,
                                                     std::string_view origin) {
  std::vector<nlohmann::ordered_json> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      records.push_back(
          parse_json(line, std::string(origin) + ":" + std::to_string(line_no)));
    }
    pos = end + 1;
  }
  return records;
}

std::string dump_json_lines(const std::vector<nlohmann::ordered_json>& records) {
  std::string out;
  for (const auto& record : records) {
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace nsvqa
