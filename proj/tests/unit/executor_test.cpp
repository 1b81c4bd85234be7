#include <gtest/gtest.h>

#include "nsvqa/executor.hpp"
#include "test_util.hpp"

using namespace nsvqa;
using namespace nsvqa::testing;

namespace {

ExecOutcome run(const std::string& program, std::vector<std::string> images,
                const AliasDictionary* dict = nullptr) {
  static const GraphStore store = fixture_graphs();
  return execute(prog(program), make_image_set(store, images), dict);
}

std::vector<EventKind> kinds(const ExecOutcome& o) {
  std::vector<EventKind> out;
  for (const auto& e : o.events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Execute, FirstBoyAutoFix) {
  // img2 holds two boys; the first (sitting) is used.
  const auto o = run(R"([{"op":"find","args":["boy"]},{"op":"verify","qualifier":"attr","args":["standing"],"deps":[0]}])",
                     {"img2"});
  EXPECT_EQ(o.answer, "no");
  EXPECT_EQ(kinds(o), std::vector<EventKind>{EventKind::NonUniqueAutoFix});
  EXPECT_EQ(o.events[0].step_index, 1u);
  EXPECT_FALSE(o.fatal);
}

TEST(Execute, MissingObjectIsFatal) {
  const auto o = run(R"([{"op":"find","args":["mattress"]},{"op":"query","qualifier":"attr","args":["color"],"deps":[0]}])",
                     {"img2"});
  EXPECT_TRUE(o.fatal);
  EXPECT_FALSE(o.answer);
  EXPECT_EQ(kinds(o), std::vector<EventKind>{EventKind::ObjectNotFound});
}

TEST(Execute, EmptySetDownstreamIsNotFatal) {
  const auto o = run(R"([{"op":"find","args":["mattress"]},{"op":"count","deps":[0]}])", {"img2"});
  EXPECT_EQ(o.answer, "0");
  EXPECT_TRUE(o.events.empty());
}

TEST(Execute, CountBottles) {
  EXPECT_EQ(run(R"([{"op":"find","args":["bottle"]},{"op":"count","deps":[0]}])", {"img1"}).answer, "2");
  EXPECT_EQ(run(R"([{"op":"find","args":["bottle"]},{"op":"count","deps":[0]}])", {"img1", "img2", "img3"}).answer,
            "4");
}

TEST(Execute, CompareMissingOperandDefaultsToZero) {
  // compare(geq, <missing>, 2): left defaults to 0, 0 >= 2 is false.
  const auto o = run(R"([{"op":"find","args":["bottle"]},{"op":"compare","qualifier":"geq","args":[2]}])", {"img1"});
  EXPECT_EQ(o.answer, "no");
  EXPECT_EQ(kinds(o), std::vector<EventKind>{EventKind::DefaultValueInserted});
  // compare(geq, count, <missing>): count >= 0.
  const auto p = run(R"([{"op":"find","args":["bottle"]},{"op":"count","deps":[0]},{"op":"compare","qualifier":"geq","deps":[1]}])",
                     {"img2"});
  EXPECT_EQ(p.answer, "yes");
  EXPECT_EQ(kinds(p), std::vector<EventKind>{EventKind::DefaultValueInserted});
}

TEST(Execute, FixtureGoldSelfConsistency) {
  const GraphStore store = fixture_graphs();
  for (const auto& ex : fixture_examples()) {
    const auto o = execute(*ex.program, make_image_set(store, ex.image_ids));
    EXPECT_EQ(o.answer, ex.answer) << ex.example_id;
  }
}

TEST(Execute, FilterRelationVariants) {
  const std::string base = R"([{"op":"scene"},{"op":"find","args":["table"]},)";
  EXPECT_EQ(run(base + R"({"op":"filter","qualifier":"rel","args":["on"],"deps":[0,1]},{"op":"count","deps":[2]}])",
                {"img1", "img2", "img3"}).answer, "2");
  EXPECT_EQ(run(base + R"({"op":"filter","qualifier":"rel","args":["on"],"deps":[0]},{"op":"count","deps":[2]}])",
                {"img1", "img2", "img3"}).answer, "4");
}

TEST(Execute, GroupingAndImageTokens) {
  // Empty groups count: 3 groups even though img2 has no bottle.
  EXPECT_EQ(run(R"([{"op":"find","args":["bottle"]},{"op":"group_by_images","deps":[0]},{"op":"count","deps":[1]}])",
                {"img1", "img2", "img3"}).answer, "3");
  EXPECT_EQ(run(R"([{"op":"find","args":["bottle"]},{"op":"unique_images","deps":[0]},{"op":"count","deps":[1]}])",
                {"img1", "img2", "img3"}).answer, "2");
  EXPECT_EQ(run(R"([{"op":"find","args":["bottle"]},{"op":"group_by_images","deps":[0]},)"
                R"({"op":"keep_if_values_count","qualifier":"leq","args":[1],"deps":[1]},{"op":"keys","deps":[2]},{"op":"count","deps":[3]}])",
                {"img1", "img2", "img3"}).answer, "1");
}

TEST(Execute, KeepIfMissingThresholdDefaults) {
  const auto o = run(R"([{"op":"find","args":["bottle"]},{"op":"group_by_images","deps":[0]},)"
                     R"({"op":"keep_if_values_count","qualifier":"eq","deps":[1]},{"op":"count","deps":[2]}])",
                     {"img1", "img2", "img3"});
  EXPECT_EQ(o.answer, "1");
  EXPECT_EQ(kinds(o), std::vector<EventKind>{EventKind::DefaultValueInserted});
}

TEST(Execute, EmptyQuantifiers) {
  const std::string sub = R"("sub":[{"op":"scene"},{"op":"exists","deps":[0]}])";
  EXPECT_EQ(run(R"([{"op":"find","args":["unicorn"]},{"op":"map","qualifier":"or","deps":[0],)" + sub + "}]", {"img1"}).answer, "no");
  EXPECT_EQ(run(R"([{"op":"find","args":["unicorn"]},{"op":"map","qualifier":"and","deps":[0],)" + sub + "}]", {"img1"}).answer, "yes");
}

TEST(Execute, MapOverGroupsBindsEachGroup) {
  // Every image has at least one bottle?  img2 has none.
  const std::string p =
      R"([{"op":"find","args":["bottle"]},{"op":"group_by_images","deps":[0]},{"op":"map","qualifier":"and","deps":[1],)"
      R"("sub":[{"op":"scene"},{"op":"exists","deps":[0]}]}])";
  EXPECT_EQ(run(p, {"img1", "img2", "img3"}).answer, "no");
  EXPECT_EQ(run(p, {"img1", "img3"}).answer, "yes");
}

TEST(Execute, ChooseResolution) {
  const std::string find_parrot = R"([{"op":"find","args":["parrot"]},)";
  EXPECT_EQ(run(find_parrot + R"({"op":"choose","qualifier":"attr","args":["blue","red"],"deps":[0]}])", {"img3"}).answer, "red");
  const auto both = run(find_parrot + R"({"op":"choose","qualifier":"attr","args":["small","red"],"deps":[0]}])", {"img3"});
  EXPECT_EQ(both.answer, "small");
  EXPECT_EQ(kinds(both), std::vector<EventKind>{EventKind::NonUniqueAutoFix});
  const auto neither = run(find_parrot + R"({"op":"choose","qualifier":"attr","args":["blue","large"],"deps":[0]}])", {"img3"});
  EXPECT_EQ(neither.answer, "blue");
  EXPECT_EQ(kinds(neither), std::vector<EventKind>{EventKind::DefaultValueInserted});
}

TEST(Execute, ChooseRelAndName) {
  EXPECT_EQ(run(R"([{"op":"find","args":["parrot"]},{"op":"find","args":["tree"]},{"op":"choose","qualifier":"rel","args":["near","on"],"deps":[0,1]}])",
                {"img3"}).answer, "on");
  EXPECT_EQ(run(R"([{"op":"find","args":["parrot"]},{"op":"choose","qualifier":"name","args":["eagle","parrot"],"deps":[0]}])",
                {"img3"}).answer, "parrot");
  AliasDictionary dict;
  dict.add("bird", "parrot");
  const std::string p = R"([{"op":"find","args":["parrot"]},{"op":"choose","qualifier":"name","args":["bird","eagle"],"deps":[0]}])";
  EXPECT_EQ(run(p, {"img3"}, &dict).answer, "bird");
  EXPECT_EQ(kinds(run(p, {"img3"})), std::vector<EventKind>{EventKind::DefaultValueInserted});
}

TEST(Execute, QueryAttributeKinds) {
  const std::string q = R"([{"op":"find","args":["parrot"]},{"op":"query","qualifier":"attr",)";
  EXPECT_EQ(run(q + R"("args":["color"],"deps":[0]}])", {"img3"}).answer, "red");
  EXPECT_EQ(run(q + R"("args":["size"],"deps":[0]}])", {"img3"}).answer, "small");
  const auto none = run(q + R"("args":["material"],"deps":[0]}])", {"img3"});
  EXPECT_EQ(none.answer, "none");
  EXPECT_EQ(kinds(none), std::vector<EventKind>{EventKind::DefaultValueInserted});
  const auto any = run(q + R"("deps":[0]}])", {"img3"});
  EXPECT_EQ(any.answer, "red");
  EXPECT_EQ(kinds(any), std::vector<EventKind>{EventKind::NonUniqueAutoFix});
  EXPECT_EQ(run(R"([{"op":"find","args":["table"]},{"op":"query","qualifier":"name","deps":[0]}])", {"img1"}).answer, "table");
}

TEST(Execute, LogicDefaults) {
  const auto o = run(R"([{"op":"find","args":["bottle"]},{"op":"exists","deps":[0]},{"op":"logic_or","deps":[1]}])", {"img1"});
  EXPECT_EQ(o.answer, "yes");
  EXPECT_EQ(kinds(o), std::vector<EventKind>{EventKind::DefaultValueInserted});
  const auto n = run(R"([{"op":"logic_not"}])", {"img1"});
  EXPECT_EQ(n.answer, "yes");
  EXPECT_EQ(n.events.size(), 1u);
}

TEST(Execute, EventsInsideMapCarryTopLevelIndex) {
  const auto o = run(R"([{"op":"find","args":["bottle"]},{"op":"map","qualifier":"or","deps":[0],)"
                     R"("sub":[{"op":"scene"},{"op":"compare","qualifier":"gt","args":[0]}]}])",
                     {"img1"});
  ASSERT_EQ(o.events.size(), 2u);  // one per bound bottle
  EXPECT_EQ(o.events[0].step_index, 1u);
  EXPECT_EQ(o.events[1].step_index, 1u);
}

TEST(Execute, FatalInsideMapStopsExecution) {
  const auto o = run(R"([{"op":"find","args":["bottle"]},{"op":"map","qualifier":"or","deps":[0],)"
                     R"("sub":[{"op":"find","args":["mattress"]},{"op":"verify","qualifier":"attr","args":["red"],"deps":[0]}]}])",
                     {"img1"});
  EXPECT_TRUE(o.fatal);
  EXPECT_EQ(o.events.size(), 1u);
}

TEST(Execute, InvalidProgramThrows) {
  EXPECT_EQ(error_of([] { run(R"([{"op":"find","args":["x"]}])", {"img1"}); }), ErrorCode::TypeMismatch);
}

TEST(Execute, AliasResolution) {
  AliasDictionary dict;
  dict.add("bird", "parrot", 3);
  dict.add("bird", "eagle", 1);
  const std::string p = R"([{"op":"find","args":["bird"]},{"op":"query","qualifier":"name","deps":[0]}])";
  EXPECT_TRUE(run(p, {"img3"}).fatal);
  EXPECT_EQ(run(p, {"img3"}, &dict).answer, "parrot");
}

TEST(Execute, Trace) {
  const GraphStore store = fixture_graphs();
  ExecOptions opts;
  opts.trace = true;
  const auto o = execute(prog(R"([{"op":"find","args":["bottle"]},{"op":"count","deps":[0]}])"),
                         make_image_set(store, std::vector<std::string>{"img1"}), nullptr, opts);
  ASSERT_EQ(o.trace.size(), 2u);
  EXPECT_EQ(o.trace[0].summary, "ObjectSet[2] img1:101,img1:102");
  EXPECT_EQ(o.trace[1].summary, "Integer 2");
}

TEST(NormalizeAnswer, Conventions) {
  EXPECT_EQ(normalize_answer(Value{true}), "yes");
  EXPECT_EQ(normalize_answer(Value{std::int64_t{0}}), "0");
  EXPECT_EQ(normalize_answer(Value{std::string("Parrot")}), "parrot");
  EXPECT_EQ(error_of([] { normalize_answer(Value{ObjectSet{}}); }), ErrorCode::NonAnswerValue);
}

TEST(Batch, OrderSkipsAndCorruptedGraphs) {
  const GraphStore gold = fixture_graphs();
  auto examples = fixture_examples();
  const auto items = batch_items_from_examples(examples);
  const auto outcomes = execute_batch(items, gold);
  ASSERT_EQ(outcomes.size(), examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    EXPECT_EQ(outcomes[i].example_id, examples[i].example_id);
    ASSERT_TRUE(outcomes[i].outcome);
    EXPECT_EQ(outcomes[i].outcome->answer, examples[i].answer);
  }
  EXPECT_TRUE(execute_batch({}, gold).empty());

  // Generated graphs where every bottle became a jar.
  auto doc = scene_graphs_to_json(gold);
  for (auto& [img, body] : doc.items()) {
    for (auto& [id, obj] : body["objects"].items()) {
      if (obj["name"] == "bottle") obj["name"] = "jar";
    }
  }
  const GraphStore generated = parse_scene_graphs(doc);
  const ClfProgram q = prog(R"([{"op":"find","args":["bottle"]},{"op":"query","qualifier":"attr","args":["color"],"deps":[0]}])");
  const std::vector<std::string> imgs{"img1"};
  const std::vector<std::string> missing{"img9"};
  const std::vector<BatchItem> probe{{"a", &q, imgs}, {"b", &q, missing}};
  const auto gen = execute_batch(probe, generated);
  ASSERT_TRUE(gen[0].outcome);
  EXPECT_TRUE(gen[0].outcome->fatal);
  EXPECT_FALSE(gen[1].outcome);
  EXPECT_TRUE(gen[1].skipped);
  const auto gold_run = execute_batch(probe, gold);
  EXPECT_EQ(gold_run[0].outcome->answer, "green");
}

TEST(Batch, ParallelMatchesSerial) {
  const Corpus c = make_covr_corpus(5, 120, 80);
  const auto items = batch_items_from_examples(c.examples);
  BatchOptions opts;
  opts.jobs = 4;
  const auto par = execute_batch(items, c.graphs, nullptr, opts);
  const auto ser = execute_batch_serial(items, c.graphs);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_EQ(outcome_to_json(par[i], GraphSource::Gold, false), outcome_to_json(ser[i], GraphSource::Gold, false));
  }
}

TEST(Batch, OutcomeRecord) {
  const GraphStore gold = fixture_graphs();
  const ClfProgram q = prog(R"([{"op":"find","args":["boy"]},{"op":"verify","qualifier":"attr","args":["standing"],"deps":[0]}])");
  const std::vector<std::string> imgs{"img2"};
  const std::vector<BatchItem> items{{"x", &q, imgs}};
  const auto j = outcome_to_json(execute_batch_serial(items, gold)[0], GraphSource::Generated, false);
  EXPECT_EQ(j.dump(), R"({"example_id":"x","answer":"no","fatal":false,"events":["NonUniqueAutoFix"],"graphs_source":"generated"})");
}
