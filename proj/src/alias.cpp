#include "nsvqa/alias.hpp"

#include <algorithm>
#include <numeric>

#include "nsvqa/error.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

void AliasDictionary::add(std::string_view mention, std::string_view name, std::int64_t count) {
  if (count < 1) return;
  auto& list = entries_[normalize_token(mention)];
  const std::string key = normalize_token(name);
  auto it = std::find_if(list.begin(), list.end(), [&](const AliasEntry& e) { return e.name == key; });
  if (it == list.end()) {
    list.push_back({key, count});
  } else {
    it->count += count;
  }
  std::sort(list.begin(), list.end(), [](const AliasEntry& a, const AliasEntry& b) {
    return a.count != b.count ? a.count > b.count : a.name < b.name;
  });
}

std::span<const AliasEntry> AliasDictionary::aliases(std::string_view mention) const {
  auto it = entries_.find(mention);
  if (it == entries_.end()) return {};
  return it->second;
}

nlohmann::ordered_json alias_dictionary_to_json(const AliasDictionary& dict) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [mention, list] : dict.entries()) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : list) arr.push_back({e.name, e.count});
    doc[mention] = std::move(arr);
  }
  return doc;
}

AliasDictionary alias_dictionary_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedFile, "alias dictionary must be an object");
  AliasDictionary dict;
  for (const auto& [mention, list] : doc.items()) {
    if (!list.is_array() || list.empty()) {
      throw Error(ErrorCode::MalformedFile, "alias list for '" + mention + "'");
    }
    for (const auto& pair : list) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_number_integer() || pair[1].get<std::int64_t>() < 1) {
        throw Error(ErrorCode::MalformedFile, "alias entry for '" + mention + "': " + pair.dump());
      }
      dict.add(mention, pair[0].get<std::string>(), pair[1].get<std::int64_t>());
    }
  }
  return dict;
}

AliasDictionary load_alias_dictionary(const std::filesystem::path& path) {
  return alias_dictionary_from_json(parse_json(read_text_file(path), path.string()));
}

void save_alias_dictionary(const AliasDictionary& dict, const std::filesystem::path& path) {
  write_text_file(path, alias_dictionary_to_json(dict).dump() + "\n");
}

Mention split_mention(std::string_view token) {
  const std::string t = normalize_token(token);
  if (t.size() >= 3 && t.back() == ')') {
    const auto open = t.rfind('(');
    if (open != std::string::npos && open > 0 && open + 2 < t.size() + 1) {
      std::string id = normalize_token(std::string_view(t).substr(open + 1, t.size() - open - 2));
      std::string text = normalize_token(std::string_view(t).substr(0, open));
      if (!id.empty() && !text.empty()) return {std::move(text), std::move(id)};
    }
  }
  return {t, std::nullopt};
}

namespace {

void strip_block(std::vector<ClfStep>& steps) {
  for (auto& step : steps) {
    if (step.op == Op::Find) {
      for (auto& arg : step.args) {
        if (auto* s = std::get_if<std::string>(&arg)) *s = split_mention(*s).text;
      }
    }
    strip_block(step.sub);
  }
}

void collect_mentions(const std::vector<ClfStep>& steps, std::vector<Mention>& out) {
  for (const auto& step : steps) {
    if (step.op == Op::Find && !step.args.empty()) {
      if (const auto* s = std::get_if<std::string>(&step.args.front())) out.push_back(split_mention(*s));
    }
    collect_mentions(step.sub, out);
  }
}

}  // namespace

ClfProgram strip_object_ids(const ClfProgram& program) {
  ClfProgram out = program;
  strip_block(out.steps);
  return out;
}

AlignmentMap load_alignments(const std::filesystem::path& path) {
  const auto doc = parse_json(read_text_file(path), path.string());
  if (!doc.is_object()) throw Error(ErrorCode::MalformedFile, "alignment file must be an object");
  AlignmentMap out;
  for (const auto& [example_id, links] : doc.items()) {
    if (!links.is_array()) throw Error(ErrorCode::MalformedFile, "alignments for " + example_id);
    auto& list = out[example_id];
    for (const auto& l : links) {
      if (!l.is_object() || !l.contains("mention") || !l.contains("object_id") ||
          !l["mention"].is_string() || !l["object_id"].is_string()) {
        throw Error(ErrorCode::MalformedFile, "alignment entry in " + example_id);
      }
      list.push_back({normalize_token(l["mention"].get<std::string>()),
                      l["object_id"].get<std::string>()});
    }
  }
  return out;
}

AliasBuildResult build_alias_dictionary(std::span<const QaExample> train, const GraphStore& graphs,
                                        const AlignmentMap* alignments) {
  AliasBuildResult result;
  for (const auto& ex : train) {
    if (!ex.program) continue;
    std::vector<Mention> mentions;
    collect_mentions(ex.program->steps, mentions);
    const std::vector<GroundingLink>* sidecar = nullptr;
    if (alignments) {
      if (auto it = alignments->find(ex.example_id); it != alignments->end()) sidecar = &it->second;
    }
    for (const auto& m : mentions) {
      std::vector<std::string> ids;
      if (m.object_id) {
        ids.push_back(*m.object_id);
      } else if (sidecar) {
        for (const auto& link : *sidecar) {
          if (link.mention == m.text) ids.push_back(link.object_id);
        }
      }
      if (ids.empty()) {
        result.ungroundable.push_back({ex.example_id, m.text, "no grounding link"});
        continue;
      }
      for (const auto& id : ids) {
        const ObjectNode* node = nullptr;
        for (const auto& image_id : ex.image_ids) {
          const GraphPtr g = graphs.find(image_id);
          if (!g) continue;
          if (auto idx = g->index_of(id)) {
            node = &g->object(*idx);
            break;
          }
        }
        if (!node) {
          result.ungroundable.push_back({ex.example_id, m.text, "object " + id + " not in images"});
          continue;
        }
        result.dictionary.add(m.text, node->name);
      }
    }
  }
  return result;
}

std::vector<std::size_t> resolve_among(const AliasDictionary* dict, std::string_view mention,
                                       const SceneGraph& graph,
                                       std::span<const std::size_t> candidates) {
  std::vector<std::size_t> out;
  for (std::size_t i : candidates) {
    if (graph.object(i).name == mention) out.push_back(i);
  }
  if (!out.empty() || !dict) return out;
  for (const auto& alias : dict->aliases(mention)) {
    for (std::size_t i : candidates) {
      if (graph.object(i).name == alias.name) out.push_back(i);
    }
  }
  return out;
}

std::vector<const ObjectNode*> resolve_name(const AliasDictionary* dict, std::string_view mention,
                                            const SceneGraph& graph) {
  std::vector<std::size_t> all(graph.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<const ObjectNode*> out;
  for (std::size_t i : resolve_among(dict, normalize_token(mention), graph, all)) {
    out.push_back(&graph.object(i));
  }
  return out;
}

}  // namespace nsvqa
