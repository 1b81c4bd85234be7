#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsvqa/clf.hpp"
#include "nsvqa/dataset.hpp"
#include "nsvqa/scene.hpp"

namespace nsvqa {

struct AliasEntry {
  std::string name;
  std::int64_t count = 0;

  bool operator==(const AliasEntry&) const = default;
};

/// Program mention -> scene-graph names it grounded to during training.
/// Each list is ordered by descending count, ties lexicographic.
class AliasDictionary {
 public:
  void add(std::string_view mention, std::string_view name, std::int64_t count = 1);

  /// Empty span when the mention was never seen.
  std::span<const AliasEntry> aliases(std::string_view mention) const;
  const std::map<std::string, std::vector<AliasEntry>, std::less<>>& entries() const {
    return entries_;
  }
  bool empty() const { return entries_.empty(); }

  bool operator==(const AliasDictionary&) const = default;

 private:
  std::map<std::string, std::vector<AliasEntry>, std::less<>> entries_;
};

nlohmann::ordered_json alias_dictionary_to_json(const AliasDictionary& dict);
AliasDictionary alias_dictionary_from_json(const nlohmann::ordered_json& doc);
AliasDictionary load_alias_dictionary(const std::filesystem::path& path);
void save_alias_dictionary(const AliasDictionary& dict, const std::filesystem::path& path);

/// A find argument such as "bird(775)" or "bird (775)".
struct Mention {
  std::string text;
  std::optional<std::string> object_id;
};

Mention split_mention(std::string_view token);

/// Copy of the program with embedded object ids removed from find arguments.
ClfProgram strip_object_ids(const ClfProgram& program);

/// Sidecar grounding: example_id -> (mention, object_id) links, used when
/// the training programs are already id-free.
struct GroundingLink {
  std::string mention;
  std::string object_id;
};
using AlignmentMap = std::map<std::string, std::vector<GroundingLink>, std::less<>>;

AlignmentMap load_alignments(const std::filesystem::path& path);

struct UngroundableMention {
  std::string example_id;
  std::string mention;
  std::string reason;
};

struct AliasBuildResult {
  AliasDictionary dictionary;
  std::vector<UngroundableMention> ungroundable;
};

/// Counts every (mention, grounded node name) pair over the find steps of
/// the training programs. Mentions without a grounding link are reported,
/// not fatal.
AliasBuildResult build_alias_dictionary(std::span<const QaExample> train, const GraphStore& graphs,
                                        const AlignmentMap* alignments = nullptr);

/// Indices into graph.objects(), restricted to `candidates` (graph order),
/// that the mention refers to: exact name matches if any exist, otherwise
/// nodes named by the mention's aliases in dictionary order.
std::vector<std::size_t> resolve_among(const AliasDictionary* dict, std::string_view mention,
                                       const SceneGraph& graph,
                                       std::span<const std::size_t> candidates);

std::vector<const ObjectNode*> resolve_name(const AliasDictionary* dict, std::string_view mention,
                                            const SceneGraph& graph);

}  // namespace nsvqa
