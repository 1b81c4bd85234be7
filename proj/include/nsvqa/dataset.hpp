#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsvqa/clf.hpp"

namespace nsvqa {

/// Where a derived example came from. All fields optional; only the ones
/// that apply are written.
struct Provenance {
  std::optional<std::string> source_example_id;
  std::optional<std::string> rule;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> fusion;
  std::optional<std::string> tag;

  bool operator==(const Provenance&) const = default;
};

/// A (question, image set, answer) triple. Images are referenced by id so
/// the same example can be run against gold or generated graphs.
struct QaExample {
  std::string example_id;
  std::string question;
  std::vector<std::string> image_ids;
  std::string answer;  // normalized
  std::optional<ClfProgram> program;
  std::optional<std::string> template_id;
  Provenance provenance;

  bool operator==(const QaExample&) const = default;
};

QaExample example_from_json(const nlohmann::ordered_json& record);
nlohmann::ordered_json example_to_json(const QaExample& example);

std::vector<QaExample> parse_examples(std::string_view jsonl, std::string_view origin = "examples");
std::vector<QaExample> load_examples(const std::filesystem::path& path);
std::string dump_examples(std::span<const QaExample> examples);
void save_examples(std::span<const QaExample> examples, const std::filesystem::path& path);

}  // namespace nsvqa
