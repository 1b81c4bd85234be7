#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsvqa/alias.hpp"
#include "nsvqa/dataset.hpp"
#include "nsvqa/scene.hpp"

namespace nsvqa {

inline constexpr std::string_view kCountGroupBy = "CountGroupBy";
inline constexpr std::string_view kVerifyCountGroupBy = "VerifyCountGroupBy";
inline constexpr std::string_view kVerifyCount = "VerifyCount";
inline constexpr std::string_view kQuantifier = "Quantifier";

// ---------------------------------------------------------------------------
// Segment-combine

enum class Fusion { Sum, Or };

std::string_view to_string(Fusion fusion);
std::optional<Fusion> fusion_from_string(std::string_view name);

/// SUM for counting templates, OR for binary ones; nullopt otherwise.
std::optional<Fusion> fusion_for_template(std::string_view template_id);

/// The answer a distractor-only image set must produce.
std::string_view neutral_answer(Fusion fusion);

/// SUM: decimal sum (throws NonNumericAnswer). OR: "yes" iff any answer is
/// "yes" (throws NonBinaryAnswer).
std::string fuse_answers(std::span<const std::string> answers, Fusion fusion);

/// Largest count label; larger fused sums are kept but flagged.
inline constexpr std::int64_t kMaxCountLabel = 5;

struct SegmentCombineCase {
  QaExample source;
  std::vector<QaExample> derived;  // i-th keeps source image i at slot i
  Fusion fusion = Fusion::Or;
  std::uint64_t seed = 0;
  std::vector<std::size_t> draws;  // distractor draws per derived example
  bool sum_out_of_range = false;
};

struct SegmentCombineOptions {
  std::size_t retry_budget = 100;  // draws per distractor slot
};

/// Splits a k-image example into k queries, each keeping one original
/// image and k-1 distractors drawn from `pool`. A distractor is accepted
/// only if the gold program on it alone yields the fusion's neutral
/// answer. Throws UnsupportedTemplate or PoolExhausted.
SegmentCombineCase gen_segment_combine(const QaExample& example, const GraphStore& graphs,
                                       std::span<const std::string> pool, std::uint64_t seed,
                                       const AliasDictionary* dict = nullptr,
                                       const SegmentCombineOptions& options = {});

/// True iff fusing the gold-program answers of the derived queries gives
/// the source answer. Fatal executions make it false.
bool verify_segment_combine(const SegmentCombineCase& c, const GraphStore& gold_graphs,
                            const AliasDictionary* dict = nullptr);

struct SegmentCombineResult {
  std::optional<SegmentCombineCase> value;
  std::optional<std::string> error;
};

/// Parallel over examples; per-example streams come from (seed, example_id).
std::vector<SegmentCombineResult> gen_segment_combine_batch(
    std::span<const QaExample> examples, const GraphStore& graphs,
    std::span<const std::string> pool, std::uint64_t seed, const AliasDictionary* dict = nullptr,
    int jobs = 0, const SegmentCombineOptions& options = {});

std::vector<SegmentCombineResult> gen_segment_combine_batch_serial(
    std::span<const QaExample> examples, const GraphStore& graphs,
    std::span<const std::string> pool, std::uint64_t seed, const AliasDictionary* dict = nullptr,
    const SegmentCombineOptions& options = {});

// ---------------------------------------------------------------------------
// Contrast sets

enum class Meaning { Preserving, Altering };
enum class LabelTransform { Identity, Flip, ReExecute };

/// Program edits paired with a phrase substitution.
enum class ProgramRewrite {
  None,          // program unchanged
  GeqToLt,       // last compare(geq) becomes compare(lt)
  GeqToNotLt,    // last compare(geq) becomes logic_not(compare(lt))
  NegateFinal,   // append logic_not over the final step
  DropFinalNot,  // remove a final logic_not
};

std::string_view to_string(Meaning m);
std::string_view to_string(LabelTransform t);
std::string_view to_string(ProgramRewrite r);

struct ContrastRule {
  std::string name;
  std::string template_id;
  std::string source_phrase;
  std::string replacement_phrase;
  Meaning meaning = Meaning::Preserving;
  LabelTransform label_transform = LabelTransform::Identity;
  std::optional<ProgramRewrite> program_rewrite;
};

bool is_counting_template(std::string_view template_id);

/// The quantifier substitutions: at least -> no less than / less than,
/// no <-> some, no -> at least one, some -> none of the,
/// all -> either none or only some.
std::vector<ContrastRule> builtin_contrast_rules();

std::vector<ContrastRule> contrast_rules_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json contrast_rules_to_json(std::span<const ContrastRule> rules);
std::vector<ContrastRule> load_contrast_rules(const std::filesystem::path& path);

/// Throws MalformedFile when a preserving rule does not keep the label.
void check_rule(const ContrastRule& rule);

ClfProgram apply_program_rewrite(const ClfProgram& program, ProgramRewrite rewrite);

/// Case-insensitive whole-word replacement of the first occurrence; a
/// capitalized match gets a capitalized replacement.
std::optional<std::string> substitute_phrase(std::string_view text, std::string_view phrase,
                                             std::string_view replacement);

/// One rule on one example. Throws PhraseNotFound,
/// ForbiddenAlteringOnCounting, NonBinaryAnswer or LabelTransformConflict.
QaExample apply_contrast_rule(const QaExample& example, const ContrastRule& rule,
                              const GraphStore& gold_graphs,
                              const AliasDictionary* dict = nullptr);

/// Applies every rule whose template matches and whose phrase occurs.
/// Throws PhraseNotFound when rules target the template but none applies.
std::vector<QaExample> gen_contrast_set(const QaExample& example,
                                        std::span<const ContrastRule> rules,
                                        const GraphStore& gold_graphs,
                                        const AliasDictionary* dict = nullptr);

struct CoherencyPair {
  std::string original_id;
  std::string contrast_id;
  std::string rule;

  bool operator==(const CoherencyPair&) const = default;
};

/// Throws MismatchedPair when the contrast was not derived from `original`.
CoherencyPair pair_for_coherency(const QaExample& original, const QaExample& contrast);

/// One pair per contrast example, in contrast order.
std::vector<CoherencyPair> pair_contrast_set(std::span<const QaExample> originals,
                                             std::span<const QaExample> contrasts);

nlohmann::ordered_json pair_to_json(const CoherencyPair& pair);
CoherencyPair pair_from_json(const nlohmann::ordered_json& record);
std::vector<CoherencyPair> load_pairs(const std::filesystem::path& path);

}  // namespace nsvqa
