#include <gtest/gtest.h>

#include "nsvqa/dataset.hpp"
#include "test_util.hpp"

using namespace nsvqa;
using namespace nsvqa::testing;

TEST(Examples, LoadFixture) {
  const auto examples = fixture_examples();
  ASSERT_EQ(examples.size(), 6u);
  EXPECT_EQ(examples[0].example_id, "fx-count");
  EXPECT_EQ(examples[0].image_ids.size(), 3u);
  ASSERT_TRUE(examples[0].program);
  EXPECT_EQ(examples[0].program->steps.size(), 5u);
  EXPECT_EQ(examples[0].template_id, "CountGroupBy");
  EXPECT_FALSE(examples[5].template_id);
}

TEST(Examples, AnswerNormalized) {
  const auto ex = parse_examples(R"({"example_id":"a","question":"q","image_ids":["i"],"answer":" Yes "})");
  EXPECT_EQ(ex[0].answer, "yes");
}

TEST(Examples, RoundTripWithProvenance) {
  auto examples = fixture_examples();
  examples[1].provenance.source_example_id = "fx-count";
  examples[1].provenance.seed = 42;
  examples[1].provenance.fusion = "OR";
  examples[2].provenance.rule = "r";
  examples[2].provenance.tag = "few_shot";
  const std::string text = dump_examples(examples);
  EXPECT_EQ(parse_examples(text), examples);
  EXPECT_EQ(dump_examples(parse_examples(text)), text);
}

TEST(Examples, MissingFieldIsMalformed) {
  EXPECT_EQ(error_of([] { parse_examples(R"({"example_id":"a","image_ids":[],"answer":"no"})"); }),
            ErrorCode::MalformedFile);
}
