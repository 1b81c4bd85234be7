#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace nsvqa {

struct Relation {
  std::string predicate;
  std::string target;  // object_id in the same graph

  bool operator==(const Relation&) const = default;
};

struct ObjectNode {
  std::string object_id;
  std::string name;
  // Set semantics; source order is kept because query(attr) picks the first.
  std::vector<std::string> attributes;
  std::vector<Relation> relations;

  bool has_attribute(std::string_view attr) const;
  bool has_relation(std::string_view predicate) const;
  bool has_relation_to(std::string_view predicate, std::string_view target) const;

  bool operator==(const ObjectNode&) const = default;
};

/// One image's scene graph. Immutable once built; object order is the
/// source-file order and is what "first object" means to the executor.
class SceneGraph {
 public:
  /// Validates ids, relation targets and token normalization. Duplicate
  /// attributes are dropped and reported through `warnings` when given.
  SceneGraph(std::string image_id, std::vector<ObjectNode> objects,
             std::vector<std::string>* warnings = nullptr);

  const std::string& image_id() const { return image_id_; }
  std::span<const ObjectNode> objects() const { return objects_; }
  std::size_t size() const { return objects_.size(); }
  const ObjectNode& object(std::size_t index) const { return objects_.at(index); }
  std::optional<std::size_t> index_of(std::string_view object_id) const;

  bool operator==(const SceneGraph& other) const {
    return image_id_ == other.image_id_ && objects_ == other.objects_;
  }

 private:
  std::string image_id_;
  std::vector<ObjectNode> objects_;
  std::unordered_map<std::string, std::size_t> index_;
};

using GraphPtr = std::shared_ptr<const SceneGraph>;

/// All graphs of one scene-graph file, in file order.
class GraphStore {
 public:
  GraphStore() = default;
  explicit GraphStore(std::vector<GraphPtr> graphs);

  std::span<const GraphPtr> graphs() const { return graphs_; }
  std::size_t size() const { return graphs_.size(); }
  GraphPtr find(std::string_view image_id) const;
  std::vector<std::string> image_ids() const;

  bool operator==(const GraphStore& other) const;

 private:
  std::vector<GraphPtr> graphs_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::size_t kMaxImagesPerSet = 5;

/// The images a query is asked over: 1..5 graphs with distinct ids.
class ImageSet {
 public:
  explicit ImageSet(std::vector<GraphPtr> images);

  std::span<const GraphPtr> images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  const SceneGraph& image(std::size_t index) const { return *images_.at(index); }
  std::vector<std::string> image_ids() const;

 private:
  std::vector<GraphPtr> images_;
};

/// Builds an ImageSet from ids, throwing MissingGraph when an id is absent.
ImageSet make_image_set(const GraphStore& store, std::span<const std::string> image_ids);

GraphStore parse_scene_graphs(const nlohmann::ordered_json& doc,
                              std::vector<std::string>* warnings = nullptr);
GraphStore load_scene_graphs(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);
nlohmann::ordered_json scene_graphs_to_json(const GraphStore& store);
void save_scene_graphs(const GraphStore& store, const std::filesystem::path& path);

}  // namespace nsvqa
