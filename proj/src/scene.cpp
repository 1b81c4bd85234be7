#include "nsvqa/scene.hpp"

#include <algorithm>
#include <unordered_set>

#include "nsvqa/error.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

bool ObjectNode::has_attribute(std::string_view attr) const {
  return std::find(attributes.begin(), attributes.end(), attr) != attributes.end();
}

bool ObjectNode::has_relation(std::string_view predicate) const {
  return std::any_of(relations.begin(), relations.end(),
                     [&](const Relation& r) { return r.predicate == predicate; });
}

bool ObjectNode::has_relation_to(std::string_view predicate, std::string_view target) const {
  return std::any_of(relations.begin(), relations.end(), [&](const Relation& r) {
    return r.predicate == predicate && r.target == target;
  });
}

namespace {

std::string require_token(std::string_view raw, std::string_view what,
                          std::string_view where) {
  std::string token = normalize_token(raw);
  if (token.empty()) {
    throw Error(ErrorCode::MalformedFile,
                "empty " + std::string(what) + " in " + std::string(where));
  }
  return token;
}

}  // namespace

SceneGraph::SceneGraph(std::string image_id, std::vector<ObjectNode> objects,
                       std::vector<std::string>* warnings)
    : image_id_(std::move(image_id)), objects_(std::move(objects)) {
  if (image_id_.empty()) throw Error(ErrorCode::MalformedFile, "empty image id");
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    ObjectNode& node = objects_[i];
    const std::string where = image_id_ + "/" + node.object_id;
    if (node.object_id.empty()) {
      throw Error(ErrorCode::MalformedFile, "empty object id in " + image_id_);
    }
    if (!index_.emplace(node.object_id, i).second) {
      throw Error(ErrorCode::DuplicateObjectId, where);
    }
    node.name = require_token(node.name, "name", where);
    std::vector<std::string> attrs;
    for (const auto& raw : node.attributes) {
      std::string attr = require_token(raw, "attribute", where);
      if (std::find(attrs.begin(), attrs.end(), attr) != attrs.end()) {
        if (warnings) warnings->push_back("duplicate attribute '" + attr + "' on " + where);
        continue;
      }
      attrs.push_back(std::move(attr));
    }
    node.attributes = std::move(attrs);
    for (auto& rel : node.relations) {
      rel.predicate = require_token(rel.predicate, "relation name", where);
    }
  }
  for (const auto& node : objects_) {
    for (const auto& rel : node.relations) {
      if (!index_.contains(rel.target)) {
        throw Error(ErrorCode::DanglingRelation,
                    image_id_ + "/" + node.object_id + " -" + rel.predicate + "-> " + rel.target);
      }
    }
  }
}

std::optional<std::size_t> SceneGraph::index_of(std::string_view object_id) const {
  auto it = index_.find(std::string(object_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GraphStore::GraphStore(std::vector<GraphPtr> graphs) : graphs_(std::move(graphs)) {
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (!index_.emplace(graphs_[i]->image_id(), i).second) {
      throw Error(ErrorCode::MalformedFile, "duplicate image id " + graphs_[i]->image_id());
    }
  }
}

GraphPtr GraphStore::find(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : graphs_[it->second];
}

std::vector<std::string> GraphStore::image_ids() const {
  std::vector<std::string> ids;
  ids.reserve(graphs_.size());
  for (const auto& g : graphs_) ids.push_back(g->image_id());
  return ids;
}

bool GraphStore::operator==(const GraphStore& other) const {
  return std::equal(graphs_.begin(), graphs_.end(), other.graphs_.begin(), other.graphs_.end(),
                    [](const GraphPtr& a, const GraphPtr& b) { return *a == *b; });
}

ImageSet::ImageSet(std::vector<GraphPtr> images) : images_(std::move(images)) {
  if (images_.empty() || images_.size() > kMaxImagesPerSet) {
    throw Error(ErrorCode::MalformedFile,
                "image set size " + std::to_string(images_.size()) + " outside 1..5");
  }
  std::unordered_set<std::string> seen;
  for (const auto& g : images_) {
    if (!g) throw Error(ErrorCode::MissingGraph, "null graph in image set");
    if (!seen.insert(g->image_id()).second) {
      throw Error(ErrorCode::MalformedFile, "repeated image " + g->image_id());
    }
  }
}

std::vector<std::string> ImageSet::image_ids() const {
  std::vector<std::string> ids;
  for (const auto& g : images_) ids.push_back(g->image_id());
  return ids;
}

ImageSet make_image_set(const GraphStore& store, std::span<const std::string> image_ids) {
  std::vector<GraphPtr> images;
  for (const auto& id : image_ids) {
    GraphPtr g = store.find(id);
    if (!g) throw Error(ErrorCode::MissingGraph, id);
    images.push_back(std::move(g));
  }
  return ImageSet(std::move(images));
}

namespace {

const nlohmann::ordered_json& expect_field(const nlohmann::ordered_json& obj, const char* key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::MalformedFile, "missing '" + std::string(key) + "' in " + where);
  }
  return *it;
}

std::string expect_string(const nlohmann::ordered_json& v, const std::string& where) {
  if (!v.is_string()) throw Error(ErrorCode::MalformedFile, "expected string in " + where);
  return v.get<std::string>();
}

}  // namespace

GraphStore parse_scene_graphs(const nlohmann::ordered_json& doc,
                              std::vector<std::string>* warnings) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedFile, "top level must be an object");
  std::vector<GraphPtr> graphs;
  for (const auto& [image_id, body] : doc.items()) {
    if (!body.is_object()) throw Error(ErrorCode::MalformedFile, "graph " + image_id);
    const auto& objects = expect_field(body, "objects", image_id);
    if (!objects.is_object()) throw Error(ErrorCode::MalformedFile, image_id + "/objects");
    std::vector<ObjectNode> nodes;
    for (const auto& [object_id, obj] : objects.items()) {
      const std::string where = image_id + "/" + object_id;
      if (!obj.is_object()) throw Error(ErrorCode::MalformedFile, where);
      ObjectNode node;
      node.object_id = object_id;
      node.name = expect_string(expect_field(obj, "name", where), where + "/name");
      if (auto it = obj.find("attributes"); it != obj.end()) {
        if (!it->is_array()) throw Error(ErrorCode::MalformedFile, where + "/attributes");
        for (const auto& a : *it) node.attributes.push_back(expect_string(a, where + "/attributes"));
      }
      if (auto it = obj.find("relations"); it != obj.end()) {
        if (!it->is_array()) throw Error(ErrorCode::MalformedFile, where + "/relations");
        for (const auto& r : *it) {
          if (!r.is_object()) throw Error(ErrorCode::MalformedFile, where + "/relations");
          node.relations.push_back(
              {expect_string(expect_field(r, "name", where), where + "/relations/name"),
               expect_string(expect_field(r, "object", where), where + "/relations/object")});
        }
      }
      nodes.push_back(std::move(node));
    }
    graphs.push_back(std::make_shared<const SceneGraph>(image_id, std::move(nodes), warnings));
  }
  return GraphStore(std::move(graphs));
}

GraphStore load_scene_graphs(const std::filesystem::path& path,
                             std::vector<std::string>* warnings) {
  return parse_scene_graphs(parse_json(read_text_file(path), path.string()), warnings);
}

nlohmann::ordered_json scene_graphs_to_json(const GraphStore& store) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& g : store.graphs()) {
    nlohmann::ordered_json objects = nlohmann::ordered_json::object();
    for (const auto& node : g->objects()) {
      nlohmann::ordered_json rels = nlohmann::ordered_json::array();
      for (const auto& r : node.relations) rels.push_back({{"name", r.predicate}, {"object", r.target}});
      objects[node.object_id] = {
          {"name", node.name}, {"attributes", node.attributes}, {"relations", std::move(rels)}};
    }
    doc[g->image_id()] = {{"objects", std::move(objects)}};
  }
  return doc;
}

void save_scene_graphs(const GraphStore& store, const std::filesystem::path& path) {
  write_text_file(path, scene_graphs_to_json(store).dump() + "\n");
}

}  // namespace nsvqa
