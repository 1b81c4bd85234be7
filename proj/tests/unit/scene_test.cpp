#include <gtest/gtest.h>

#include "nsvqa/io.hpp"
#include "nsvqa/scene.hpp"
#include "test_util.hpp"

using namespace nsvqa;
using namespace nsvqa::testing;

TEST(SceneGraphs, MinimalGraph) {
  const auto doc = nlohmann::ordered_json::parse(
      R"({"img1": {"objects": {"o1": {"name": "parrot", "attributes": [], "relations": []}}}})");
  const GraphStore store = parse_scene_graphs(doc);
  ASSERT_EQ(store.size(), 1u);
  const auto g = store.find("img1");
  ASSERT_TRUE(g);
  ASSERT_EQ(g->size(), 1u);
  EXPECT_EQ(g->object(0).name, "parrot");
}

TEST(SceneGraphs, DanglingRelation) {
  const auto doc = nlohmann::ordered_json::parse(
      R"({"img1": {"objects": {"o1": {"name": "dog", "relations": [{"name": "near", "object": "o9"}]}}}})");
  EXPECT_EQ(error_of([&] { parse_scene_graphs(doc); }), ErrorCode::DanglingRelation);
}

TEST(SceneGraphs, DuplicateObjectId) {
  std::vector<ObjectNode> nodes{{"o1", "dog", {}, {}}, {"o1", "cat", {}, {}}};
  EXPECT_EQ(error_of([&] { SceneGraph("img", nodes); }), ErrorCode::DuplicateObjectId);
}

TEST(SceneGraphs, EmptyNameRejected) {
  std::vector<ObjectNode> nodes{{"o1", "  ", {}, {}}};
  EXPECT_EQ(error_of([&] { SceneGraph("img", nodes); }), ErrorCode::MalformedFile);
}

TEST(SceneGraphs, SyntaxError) {
  const std::string path = ::testing::TempDir() + "/broken.json";
  write_text_file(path, "{\"img1\": {");
  EXPECT_EQ(error_of([&] { load_scene_graphs(path); }), ErrorCode::MalformedFile);
}

TEST(SceneGraphs, TokensNormalized) {
  std::vector<ObjectNode> nodes{{"o1", " Parrot ", {"RED", "red", " Small"}, {}}};
  std::vector<std::string> warnings;
  const SceneGraph g("img", nodes, &warnings);
  EXPECT_EQ(g.object(0).name, "parrot");
  EXPECT_EQ(g.object(0).attributes, (std::vector<std::string>{"red", "small"}));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(SceneGraphs, GqaFixtureCountsAndOrder) {
  const GraphStore store = fixture_graphs();
  EXPECT_EQ(store.image_ids(), (std::vector<std::string>{"img1", "img2", "img3"}));
  std::size_t objects = 0;
  std::vector<std::string> ids;
  for (const auto& g : store.graphs()) {
    objects += g->size();
    for (const auto& o : g->objects()) ids.push_back(o.object_id);
  }
  EXPECT_EQ(objects, 12u);
  EXPECT_EQ(ids, (std::vector<std::string>{"101", "102", "103", "104", "105", "201", "202", "203",
                                           "301", "302", "303", "304"}));
}

TEST(SceneGraphs, LoadDeterminismAndRoundTrip) {
  const GraphStore a = fixture_graphs();
  const GraphStore b = fixture_graphs();
  EXPECT_TRUE(a == b);
  const std::string path = ::testing::TempDir() + "/roundtrip.json";
  save_scene_graphs(a, path);
  EXPECT_TRUE(load_scene_graphs(path) == a);
}

TEST(ImageSets, SizeAndDistinctness) {
  const GraphStore store = fixture_graphs();
  const std::vector<std::string> ok{"img1", "img3"};
  EXPECT_EQ(make_image_set(store, ok).size(), 2u);
  const std::vector<std::string> repeated{"img1", "img1"};
  EXPECT_EQ(error_of([&] { make_image_set(store, repeated); }), ErrorCode::MalformedFile);
  const std::vector<std::string> none;
  EXPECT_EQ(error_of([&] { make_image_set(store, none); }), ErrorCode::MalformedFile);
  const std::vector<std::string> missing{"img1", "img7"};
  EXPECT_EQ(error_of([&] { make_image_set(store, missing); }), ErrorCode::MissingGraph);
}

TEST(ImageSets, AtMostFive) {
  std::vector<GraphPtr> graphs;
  for (int i = 0; i < 6; ++i) {
    graphs.push_back(std::make_shared<SceneGraph>("g" + std::to_string(i), std::vector<ObjectNode>{}));
  }
  EXPECT_EQ(error_of([&] { ImageSet s(graphs); }), ErrorCode::MalformedFile);
  graphs.pop_back();
  EXPECT_EQ(ImageSet(graphs).size(), 5u);
}
