#include "nsvqa/dataset.hpp"

#include "nsvqa/error.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

namespace {

std::string string_field(const nlohmann::ordered_json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedFile, std::string("example needs string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::ordered_json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::MalformedFile, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

QaExample example_from_json(const nlohmann::ordered_json& record) {
  if (!record.is_object()) throw Error(ErrorCode::MalformedFile, "example must be an object");
  QaExample ex;
  ex.example_id = string_field(record, "example_id");
  ex.question = string_field(record, "question");
  ex.answer = normalize_token(string_field(record, "answer"));
  const auto ids = record.find("image_ids");
  if (ids == record.end() || !ids->is_array()) {
    throw Error(ErrorCode::MalformedFile, ex.example_id + ": image_ids must be a list");
  }
  for (const auto& id : *ids) {
    if (!id.is_string()) throw Error(ErrorCode::MalformedFile, ex.example_id + ": image id");
    ex.image_ids.push_back(id.get<std::string>());
  }
  if (auto it = record.find("program"); it != record.end() && !it->is_null()) {
    ex.program = program_from_json(*it);
  }
  ex.template_id = optional_string(record, "template_id");
  ex.provenance.source_example_id = optional_string(record, "source_example_id");
  ex.provenance.rule = optional_string(record, "rule");
  ex.provenance.fusion = optional_string(record, "fusion");
  ex.provenance.tag = optional_string(record, "provenance");
  if (auto it = record.find("seed"); it != record.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) {
      throw Error(ErrorCode::MalformedFile, ex.example_id + ": seed must be an integer");
    }
    ex.provenance.seed = it->get<std::uint64_t>();
  }
  return ex;
}

nlohmann::ordered_json example_to_json(const QaExample& ex) {
  nlohmann::ordered_json j;
  j["example_id"] = ex.example_id;
  j["question"] = ex.question;
  j["image_ids"] = ex.image_ids;
  j["answer"] = ex.answer;
  if (ex.program) j["program"] = program_to_json(*ex.program);
  if (ex.template_id) j["template_id"] = *ex.template_id;
  const Provenance& p = ex.provenance;
  if (p.source_example_id) j["source_example_id"] = *p.source_example_id;
  if (p.rule) j["rule"] = *p.rule;
  if (p.seed) j["seed"] = *p.seed;
  if (p.fusion) j["fusion"] = *p.fusion;
  if (p.tag) j["provenance"] = *p.tag;
  return j;
}

std::vector<QaExample> parse_examples(std::string_view jsonl, std::string_view origin) {
  std::vector<QaExample> out;
  for (const auto& record : parse_json_lines(jsonl, origin)) out.push_back(example_from_json(record));
  return out;
}

std::vector<QaExample> load_examples(const std::filesystem::path& path) {
  return parse_examples(read_text_file(path), path.string());
}

std::string dump_examples(std::span<const QaExample> examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += example_to_json(ex).dump();
    out += '\n';
  }
  return out;
}

void save_examples(std::span<const QaExample> examples, const std::filesystem::path& path) {
  write_text_file(path, dump_examples(examples));
}

}  // namespace nsvqa
