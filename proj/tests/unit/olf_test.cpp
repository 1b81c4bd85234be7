#include <gtest/gtest.h>

#include <set>

#include "nsvqa/io.hpp"
#include "nsvqa/olf.hpp"
#include "test_util.hpp"

using namespace nsvqa;
using namespace nsvqa::testing;

namespace {

ClfProgram translate(const std::string& text) { return translate_olf_to_clf(parse_olf_program(text)); }

void collect_ops(const std::vector<OlfStep>& steps, std::set<std::string>& out) {
  for (const auto& s : steps) {
    out.insert(s.op);
    collect_ops(s.sub, out);
  }
}

void collect_tags(const std::vector<ClfStep>& steps, std::set<Op>& out) {
  for (const auto& s : steps) {
    out.insert(s.op);
    collect_tags(s.sub, out);
  }
}

}  // namespace

TEST(Translate, ChooseName) {
  const ClfProgram p = translate(
      R"([{"op":"find","args":["tree"]},{"op":"choose_name","args":["branch","swing"],"deps":[0]}])");
  EXPECT_EQ(serialize_program(p),
            R"([{"op":"find","args":["tree"],"deps":[]},{"op":"choose","qualifier":"name","args":["branch","swing"],"deps":[0]}])");
}

TEST(Translate, NoneBecomesNegatedMapOr) {
  const ClfProgram p = translate(
      R"([{"op":"find","args":["dog"]},{"op":"none","deps":[0],"sub":[{"op":"scene"},{"op":"exists","deps":[0]}]}])");
  ASSERT_EQ(p.steps.size(), 3u);
  EXPECT_EQ(p.steps[1].op, Op::Map);
  EXPECT_EQ(p.steps[1].qualifier, Qualifier::Or);
  EXPECT_EQ(p.steps[2].op, Op::LogicNot);
  EXPECT_EQ(p.steps[2].deps, (std::vector<std::size_t>{1}));
}

TEST(Translate, UniqueDeletedAndRewired) {
  const ClfProgram p = translate(
      R"([{"op":"find","args":["boy"]},{"op":"unique","deps":[0]},{"op":"query_name","deps":[1]}])");
  EXPECT_EQ(serialize_program(p),
            R"([{"op":"find","args":["boy"],"deps":[]},{"op":"query","qualifier":"name","args":[],"deps":[0]}])");
}

TEST(Translate, NoneConsumersFollowTheNegation) {
  const ClfProgram p = translate(
      R"([{"op":"find","args":["dog"]},{"op":"none","deps":[0],"sub":[{"op":"scene"},{"op":"exists","deps":[0]}]},)"
      R"({"op":"logic_and","deps":[1,1]}])");
  EXPECT_EQ(p.steps.back().deps, (std::vector<std::size_t>{2, 2}));
}

TEST(Translate, Errors) {
  EXPECT_EQ(error_of([] { translate(R"([{"op":"select","args":["x"]}])"); }), ErrorCode::UnknownOlfOperation);
  EXPECT_EQ(error_of([] { translate(R"([{"op":"find","args":["x"]},{"op":"find","args":["y"]},{"op":"unique","deps":[0,1]}])"); }),
            ErrorCode::MalformedOlf);
  EXPECT_EQ(error_of([] { translate(R"([{"op":"find","args":["x"]},{"op":"filter","qualifier":"attr","args":["red"],"deps":[0]}])"); }),
            ErrorCode::BadQualifier);
}

TEST(Translate, SharedQualifierAcrossChooseAndQuery) {
  const ClfProgram a = translate(R"([{"op":"find","args":["x"]},{"op":"choose_name","args":["a","b"],"deps":[0]}])");
  const ClfProgram b = translate(R"([{"op":"find","args":["x"]},{"op":"query_name","deps":[0]}])");
  EXPECT_EQ(a.steps[1].qualifier, Qualifier::Name);
  EXPECT_EQ(a.steps[1].qualifier, b.steps[1].qualifier);
}

TEST(Translate, CorpusCoversEveryOperationAndCompresses) {
  const auto records = parse_json_lines(read_text_file(data_dir() + "/olf_corpus.jsonl"), "olf");
  std::set<std::string> used;
  std::set<Op> tags;
  for (const auto& r : records) {
    const OlfProgram olf = olf_program_from_json(r);
    collect_ops(olf.steps, used);
    const ClfProgram clf = translate_olf_to_clf(olf);
    EXPECT_TRUE(validate(clf).executable()) << r.dump();
    collect_tags(clf.steps, tags);
  }
  const std::set<std::string> known(olf_operations().begin(), olf_operations().end());
  EXPECT_EQ(used, known);
  EXPECT_EQ(known.size(), 32u);
  EXPECT_LE(tags.size(), 17u);
}

TEST(OlfJson, RoundTrip) {
  const std::string text =
      R"([{"op":"find","args":["dog"],"deps":[]},{"op":"some","args":[],"deps":[0],"sub":[{"op":"scene","args":[],"deps":[]}]}])";
  EXPECT_EQ(olf_program_to_json(parse_olf_program(text)).dump(), text);
}
