#include <omp.h>

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "nsvqa/error.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/rng.hpp"
#include "nsvqa/testgen.hpp"

namespace nsvqa {

std::string_view to_string(Fusion fusion) { return fusion == Fusion::Sum ? "SUM" : "OR"; }

std::optional<Fusion> fusion_from_string(std::string_view name) {
  if (name == "SUM") return Fusion::Sum;
  if (name == "OR") return Fusion::Or;
  return std::nullopt;
}

std::optional<Fusion> fusion_for_template(std::string_view template_id) {
  if (template_id == kCountGroupBy) return Fusion::Sum;
  if (template_id == kVerifyCountGroupBy) return Fusion::Or;
  return std::nullopt;
}

std::string_view neutral_answer(Fusion fusion) { return fusion == Fusion::Sum ? "0" : "no"; }

std::string fuse_answers(std::span<const std::string> answers, Fusion fusion) {
  if (fusion == Fusion::Or) {
    bool any = false;
    for (const auto& a : answers) {
      if (a != "yes" && a != "no") throw Error(ErrorCode::NonBinaryAnswer, "'" + a + "'");
      any = any || a == "yes";
    }
    return any ? "yes" : "no";
  }
  std::int64_t sum = 0;
  for (const auto& a : answers) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
    if (ec != std::errc() || ptr != a.data() + a.size() || a.empty()) {
      throw Error(ErrorCode::NonNumericAnswer, "'" + a + "'");
    }
    sum += v;
  }
  return std::to_string(sum);
}

namespace {

std::optional<std::string> gold_answer_on(const ClfProgram& program, std::vector<GraphPtr> images,
                                          const AliasDictionary* dict) {
  const ExecOutcome outcome = execute(program, ImageSet(std::move(images)), dict);
  return outcome.answer;
}

}  // namespace

SegmentCombineCase gen_segment_combine(const QaExample& example, const GraphStore& graphs,
                                       std::span<const std::string> pool, std::uint64_t seed,
                                       const AliasDictionary* dict,
                                       const SegmentCombineOptions& options) {
  const auto fusion = example.template_id ? fusion_for_template(*example.template_id) : std::nullopt;
  if (!fusion) {
    throw Error(ErrorCode::UnsupportedTemplate,
                example.example_id + ": " + example.template_id.value_or("(none)"));
  }
  if (!example.program) {
    throw Error(ErrorCode::UnsupportedTemplate, example.example_id + ": no gold program");
  }
  const std::size_t k = example.image_ids.size();
  std::vector<GraphPtr> originals;
  for (const auto& id : example.image_ids) {
    GraphPtr g = graphs.find(id);
    if (!g) throw Error(ErrorCode::MissingGraph, id);
    originals.push_back(std::move(g));
  }
  const std::unordered_set<std::string> source_ids(example.image_ids.begin(),
                                                   example.image_ids.end());
  const std::string_view neutral = neutral_answer(*fusion);

  SegmentCombineCase result;
  result.source = example;
  result.fusion = *fusion;
  result.seed = seed;

  std::vector<std::string> derived_answers;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t stream_seed = derive_seed(seed, example.example_id, i);
    Rng rng(stream_seed);
    std::vector<GraphPtr> chosen;
    std::unordered_set<std::string> used = source_ids;
    std::size_t draws = 0;
    while (chosen.size() + 1 < k) {
      bool accepted = false;
      for (std::size_t attempt = 0; attempt < options.retry_budget && !pool.empty(); ++attempt) {
        ++draws;
        const std::string& candidate_id = pool[rng.uniform_index(pool.size())];
        if (used.contains(candidate_id)) continue;
        GraphPtr candidate = graphs.find(candidate_id);
        if (!candidate) continue;
        if (gold_answer_on(*example.program, {candidate}, dict) != std::optional<std::string>(neutral)) {
          continue;
        }
        used.insert(candidate_id);
        chosen.push_back(std::move(candidate));
        accepted = true;
        break;
      }
      if (!accepted) {
        throw Error(ErrorCode::PoolExhausted,
                    example.example_id + ": no unrelated distractor for slot " + std::to_string(i));
      }
    }
    // Original image keeps its slot; distractors fill the rest in draw order.
    std::vector<GraphPtr> images;
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
      images.push_back(slot == i ? originals[i] : chosen[next++]);
    }
    QaExample derived;
    derived.example_id = example.example_id + "#seg" + std::to_string(i);
    derived.question = example.question;
    for (const auto& g : images) derived.image_ids.push_back(g->image_id());
    derived.program = example.program;
    derived.template_id = example.template_id;
    derived.provenance.source_example_id = example.example_id;
    derived.provenance.seed = stream_seed;
    derived.provenance.fusion = std::string(to_string(*fusion));
    derived.answer = gold_answer_on(*example.program, images, dict).value_or("");
    derived_answers.push_back(derived.answer);
    result.derived.push_back(std::move(derived));
    result.draws.push_back(draws);
  }
  if (*fusion == Fusion::Sum) {
    try {
      result.sum_out_of_range = std::stoll(fuse_answers(derived_answers, Fusion::Sum)) > kMaxCountLabel;
    } catch (const Error&) {
      result.sum_out_of_range = false;
    }
  }
  return result;
}

bool verify_segment_combine(const SegmentCombineCase& c, const GraphStore& gold_graphs,
                            const AliasDictionary* dict) {
  if (!c.source.program) return false;
  std::vector<std::string> answers;
  try {
    for (const auto& derived : c.derived) {
      const ExecOutcome outcome =
          execute(*c.source.program, make_image_set(gold_graphs, derived.image_ids), dict);
      if (outcome.fatal || !outcome.answer) return false;
      answers.push_back(*outcome.answer);
    }
    return fuse_answers(answers, c.fusion) == c.source.answer;
  } catch (const Error&) {
    return false;
  }
}

namespace {

SegmentCombineResult gen_one(const QaExample& ex, const GraphStore& graphs,
                             std::span<const std::string> pool, std::uint64_t seed,
                             const AliasDictionary* dict, const SegmentCombineOptions& options) {
  SegmentCombineResult r;
  try {
    r.value = gen_segment_combine(ex, graphs, pool, seed, dict, options);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::vector<SegmentCombineResult> gen_segment_combine_batch_serial(
    std::span<const QaExample> examples, const GraphStore& graphs,
    std::span<const std::string> pool, std::uint64_t seed, const AliasDictionary* dict,
    const SegmentCombineOptions& options) {
  std::vector<SegmentCombineResult> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(gen_one(ex, graphs, pool, seed, dict, options));
  return out;
}

std::vector<SegmentCombineResult> gen_segment_combine_batch(
    std::span<const QaExample> examples, const GraphStore& graphs,
    std::span<const std::string> pool, std::uint64_t seed, const AliasDictionary* dict, int jobs,
    const SegmentCombineOptions& options) {
  std::vector<SegmentCombineResult> out(examples.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = gen_one(examples[i], graphs, pool, seed, dict, options);
  }
  return out;
}

}  // namespace nsvqa
