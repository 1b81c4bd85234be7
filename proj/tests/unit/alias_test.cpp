#include <gtest/gtest.h>

#include <filesystem>

#include "nsvqa/alias.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/io.hpp"
#include "test_util.hpp"

using namespace nsvqa;
using namespace nsvqa::testing;

namespace {

QaExample train_example(std::string id, std::string image, std::string mention) {
  QaExample ex;
  ex.example_id = std::move(id);
  ex.question = "What is it?";
  ex.image_ids = {std::move(image)};
  ex.answer = "x";
  ex.program = prog(R"([{"op":"find","args":[")" + mention + R"("]},{"op":"query","qualifier":"name","deps":[0]}])");
  return ex;
}

// Fraction of alias-corpus test questions answered correctly.
double alias_accuracy(const AliasCorpus& c, const AliasDictionary* dict) {
  std::size_t ok = 0;
  for (const auto& ex : c.test) {
    const auto o = execute(*ex.program, make_image_set(c.graphs, ex.image_ids), dict);
    if (o.answer == ex.answer) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(c.test.size());
}

}  // namespace

TEST(Mention, Split) {
  EXPECT_EQ(split_mention("bird(775)").text, "bird");
  EXPECT_EQ(split_mention("bird (775)").object_id, "775");
  EXPECT_FALSE(split_mention("bird").object_id);
  EXPECT_EQ(split_mention("Bird").text, "bird");
}

TEST(AliasBuild, BirdGroundsToParrot) {
  const GraphStore g = fixture_graphs();
  const std::vector<QaExample> train{train_example("t1", "img3", "bird(303)")};
  const auto r = build_alias_dictionary(train, g);
  ASSERT_EQ(r.dictionary.aliases("bird").size(), 1u);
  EXPECT_EQ(r.dictionary.aliases("bird")[0], (AliasEntry{"parrot", 1}));
  EXPECT_TRUE(r.ungroundable.empty());
}

TEST(AliasBuild, CountsOrderAliases) {
  const GraphStore g = parse_scene_graphs(nlohmann::ordered_json::parse(R"({
    "a": {"objects": {"1": {"name": "parrot"}}},
    "b": {"objects": {"1": {"name": "eagle"}}}
  })"));
  std::vector<QaExample> train;
  for (int i = 0; i < 3; ++i) train.push_back(train_example("p" + std::to_string(i), "a", "bird(1)"));
  train.push_back(train_example("e", "b", "bird(1)"));
  const auto dict = build_alias_dictionary(train, g).dictionary;
  const auto list = dict.aliases("bird");
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0], (AliasEntry{"parrot", 3}));
  EXPECT_EQ(list[1], (AliasEntry{"eagle", 1}));
}

TEST(AliasBuild, UngroundableMentionsAreReported) {
  const GraphStore g = fixture_graphs();
  const std::vector<QaExample> train{train_example("t1", "img3", "bird"), train_example("t2", "img3", "bird(999)")};
  const auto r = build_alias_dictionary(train, g);
  EXPECT_TRUE(r.dictionary.empty());
  EXPECT_EQ(r.ungroundable.size(), 2u);
}

TEST(AliasBuild, SidecarAlignments) {
  const GraphStore g = fixture_graphs();
  const std::vector<QaExample> train{train_example("t1", "img3", "bird")};
  AlignmentMap links;
  links["t1"] = {GroundingLink{"bird", "303"}};
  const auto r = build_alias_dictionary(train, g, &links);
  EXPECT_EQ(r.dictionary.aliases("bird")[0].name, "parrot");
}

TEST(AliasResolve, ExactMatchDominates) {
  const GraphStore g = parse_scene_graphs(nlohmann::ordered_json::parse(R"({
    "a": {"objects": {"1": {"name": "parrot"}, "2": {"name": "bird"}, "3": {"name": "eagle"}}}
  })"));
  AliasDictionary dict;
  dict.add("bird", "parrot", 5);
  const auto hits = resolve_name(&dict, "bird", *g.find("a"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0]->object_id, "2");
  EXPECT_TRUE(resolve_name(&dict, "eagle", *g.find("a")).size() == 1);
  EXPECT_TRUE(resolve_name(nullptr, "parrot", *g.find("a")).size() == 1);
}

TEST(AliasResolve, DictionaryOrderThenGraphOrderInFind) {
  const GraphStore g = parse_scene_graphs(nlohmann::ordered_json::parse(R"({
    "a": {"objects": {"1": {"name": "eagle"}, "2": {"name": "parrot"}}}
  })"));
  AliasDictionary dict;
  dict.add("bird", "parrot", 3);
  dict.add("bird", "eagle", 1);
  const auto hits = resolve_name(&dict, "bird", *g.find("a"));
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0]->object_id, "2");
  // find hands the executor a set, so the first object is the first in graph order.
  const ClfProgram p = prog(R"([{"op":"find","args":["bird"]},{"op":"query","qualifier":"name","deps":[0]}])");
  const std::vector<std::string> ids{"a"};
  EXPECT_EQ(execute(p, make_image_set(g, ids), &dict).answer, "eagle");
  const std::vector<std::size_t> only_second{1};
  EXPECT_EQ(resolve_among(&dict, "bird", *g.find("a"), only_second), (std::vector<std::size_t>{1}));
}

TEST(AliasDictionaryTest, AddMergesAndSorts) {
  AliasDictionary d;
  d.add("bird", "eagle", 2);
  d.add("bird", "parrot", 1);
  d.add("bird", "parrot", 2);
  d.add("bird", "crow", 2);
  const auto list = d.aliases("bird");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[0], (AliasEntry{"parrot", 3}));
  EXPECT_EQ(list[1], (AliasEntry{"crow", 2}));
  EXPECT_EQ(list[2], (AliasEntry{"eagle", 2}));
  EXPECT_TRUE(d.aliases("dog").empty());
}

TEST(AliasDictionaryTest, PersistenceRoundTrip) {
  AliasDictionary d;
  d.add("bird", "parrot", 3);
  d.add("bird", "eagle", 1);
  d.add("kid", "boy", 2);
  const auto path = std::filesystem::temp_directory_path() / "nsvqa_alias_rt.json";
  save_alias_dictionary(d, path);
  EXPECT_EQ(load_alias_dictionary(path), d);
  std::filesystem::remove(path);
  EXPECT_EQ(alias_dictionary_from_json(alias_dictionary_to_json(d)), d);
}

TEST(AliasDictionaryTest, StripObjectIds) {
  const ClfProgram p = prog(R"j([{"op":"find","args":["bird(303)"]},{"op":"query","qualifier":"name","deps":[0]}])j");
  EXPECT_EQ(strip_object_ids(p).steps[0].args[0], Literal{std::string("bird")});
}

TEST(AliasCorpusTest, DictionaryLiftsAccuracy) {
  const AliasCorpus c = make_alias_corpus(11);
  const auto r = build_alias_dictionary(c.train, c.graphs);
  EXPECT_TRUE(r.ungroundable.empty());
  EXPECT_EQ(alias_accuracy(c, nullptr), 0.0);
  EXPECT_EQ(alias_accuracy(c, &r.dictionary), 1.0);
}

TEST(AliasCorpusTest, MoreTrainingNeverHurts) {
  const AliasCorpus c = make_alias_corpus(12);
  double last = -1.0;
  for (std::size_t n : {0u, 1u, 5u, 20u, 40u}) {
    const std::span<const QaExample> prefix(c.train.data(), n);
    const auto dict = build_alias_dictionary(prefix, c.graphs).dictionary;
    const double acc = alias_accuracy(c, &dict);
    EXPECT_GE(acc, last) << n;
    last = acc;
  }
}
