#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nsvqa/alias.hpp"
#include "nsvqa/dataset.hpp"
#include "nsvqa/scene.hpp"
#include "nsvqa/testgen.hpp"

namespace nsvqa {

/// An exact fraction; undefined when the denominator is zero.
struct Rate {
  std::int64_t num = 0;
  std::int64_t den = 0;

  bool defined() const { return den > 0; }
  std::optional<double> value() const;
  /// Cross-multiplied comparison, so 2/4 == 1/2.
  bool same_as(std::int64_t n, std::int64_t d) const;

  bool operator==(const Rate&) const = default;
};

struct PredictionRecord {
  std::string example_id;
  std::optional<std::string> program;  // CLF program text
  std::optional<std::string> answer;
  std::string system;
};

PredictionRecord prediction_from_json(const nlohmann::ordered_json& record);
nlohmann::ordered_json prediction_to_json(const PredictionRecord& record);
std::vector<PredictionRecord> parse_predictions(std::string_view jsonl, std::string_view origin);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

inline constexpr std::string_view kUntemplated = "untemplated";

std::string template_key(const QaExample& example);

enum class ExecStatus { Correct, Wrong, Fatal, Unparseable, Skipped };

struct ExampleExecResult {
  std::string example_id;
  std::string template_key;
  ExecStatus status = ExecStatus::Skipped;
  std::optional<std::string> answer;
};

struct ExecScore {
  Rate accuracy;              // correct / scored
  Rate missing_object_ratio;  // fatal / scored
  std::size_t unparseable = 0;
  std::size_t skipped = 0;
  std::vector<ExampleExecResult> per_example;  // in example order
};

struct ExecScoreOptions {
  bool use_gold_programs = false;  // score the examples' own programs instead
  int jobs = 0;
};

/// Executes each example's predicted program and compares the normalized
/// answer to the gold label. Fatal runs and unparseable programs count as
/// incorrect; examples without a prediction, program or graph are skipped.
ExecScore score_exec(std::span<const PredictionRecord> predictions,
                     std::span<const QaExample> examples, const GraphStore& graphs,
                     const AliasDictionary* dict = nullptr, const ExecScoreOptions& options = {});

/// Aggregates a subset of per-example results.
ExecScore summarize_exec(std::span<const ExampleExecResult> results);

struct ExactScore {
  Rate rate;
  std::size_t skipped_no_gold = 0;
  std::map<std::string, bool> per_example;
};

/// Mean exact_match of predicted vs gold programs. Unparseable predictions
/// count as mismatches; examples without a gold program are skipped.
ExactScore score_exact(std::span<const PredictionRecord> predictions,
                       std::span<const QaExample> examples);

/// Fraction of predicted answers equal to the gold label, over predictions
/// that carry an answer.
Rate score_answers(std::span<const PredictionRecord> predictions,
                   std::span<const QaExample> examples);

/// (1/n) * #{pairs whose two predicted answers are identical}. Throws
/// UnpairedRecord if a pair references an id with no answer.
Rate score_local_coherency(const std::map<std::string, std::string>& original_answers,
                           const std::map<std::string, std::string>& contrast_answers,
                           std::span<const CoherencyPair> pairs);

/// Keeps the examples of each side whose gold answer occurs on both sides.
std::pair<std::vector<QaExample>, std::vector<QaExample>> cross_benchmark_filter(
    std::span<const QaExample> a, std::span<const QaExample> b);

/// Training set plus k contrast examples sampled deterministically from
/// `seed`, tagged as few-shot additions. Throws KTooLarge.
std::vector<QaExample> few_shot_augment(std::span<const QaExample> train,
                                        std::span<const QaExample> contrast, std::size_t k,
                                        std::uint64_t seed);

struct MetricRow {
  std::string split;
  std::string template_key;
  std::size_t n = 0;
  std::optional<Rate> accuracy;  // answer field if any, else GenExec, else GTExec
  std::optional<Rate> gen_exec;
  std::optional<Rate> gt_exec;
  std::optional<Rate> exact;
  std::optional<Rate> local_coherency;
  std::optional<Rate> missing_object_ratio;
};

struct MetricReport {
  std::vector<MetricRow> rows;  // per template, then "all" when there are several
};

struct EvalInputs {
  std::string split = "eval";
  std::span<const QaExample> examples;
  std::span<const PredictionRecord> predictions;
  const GraphStore* gold_graphs = nullptr;
  const GraphStore* generated_graphs = nullptr;
  const AliasDictionary* dict = nullptr;
  bool gt_exec_gold_programs = false;
  // Local coherency inputs; both empty means the metric is omitted.
  std::span<const PredictionRecord> contrast_predictions;
  std::span<const CoherencyPair> pairs;
  int jobs = 0;
};

MetricReport evaluate(const EvalInputs& inputs);

enum class ReportFormat { Csv, Json };

std::string report_to_csv(const MetricReport& report);
nlohmann::ordered_json report_to_json(const MetricReport& report);
/// Plain-text table: one row per split/template, GTExec in brackets.
std::string render_table(const MetricReport& report);
void emit_report(const MetricReport& report, const std::filesystem::path& path, ReportFormat format);

/// Shortest round-trip decimal form of a rate's value; empty when undefined.
std::string format_rate(const std::optional<Rate>& rate);

}  // namespace nsvqa
