#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsvqa/alias.hpp"
#include "nsvqa/clf.hpp"
#include "nsvqa/dataset.hpp"
#include "nsvqa/scene.hpp"
#include "nsvqa/value.hpp"

namespace nsvqa {

enum class EventKind { NonUniqueAutoFix, DefaultValueInserted, ObjectNotFound };

std::string_view to_string(EventKind kind);

/// A runtime grammar-checker finding. Events raised inside a map block carry
/// the index of the enclosing top-level map step.
struct GrammarEvent {
  EventKind kind;
  std::size_t step_index;
  std::string detail;
};

struct TraceEntry {
  std::size_t step_index;
  ValueType type;
  std::string summary;  // sizes and ids only
};

struct ExecOutcome {
  std::optional<std::string> answer;  // absent iff fatal
  std::vector<GrammarEvent> events;
  std::vector<TraceEntry> trace;
  bool fatal = false;
};

struct ExecOptions {
  bool trace = false;
};

/// Answer returned by query(attr) when the object has no attribute of the
/// requested kind.
inline constexpr std::string_view kNoAttributeAnswer = "none";

/// Category ("color", "material", ...) of a known attribute token.
std::optional<std::string_view> attribute_category(std::string_view attribute);

/// Runs a program over an image set. Single-object inputs that hold more
/// than one object are reduced to the first (NonUniqueAutoFix); missing
/// Integer/Boolean operands become 0/false (DefaultValueInserted); an empty
/// single-object input stops execution (ObjectNotFound, fatal). Throws
/// Error when the program fails static validation.
ExecOutcome execute(const ClfProgram& program, const ImageSet& images,
                    const AliasDictionary* dict = nullptr, const ExecOptions& options = {});

/// Boolean -> yes/no, Integer -> decimal, String -> lowercase token.
/// Throws NonAnswerValue for set-typed values.
std::string normalize_answer(const Value& value);

enum class GraphSource { Gold, Generated };

std::string_view to_string(GraphSource source);

/// One program to run against images looked up by id. The pointed-to data
/// must outlive the batch call.
struct BatchItem {
  std::string example_id;
  const ClfProgram* program = nullptr;
  std::span<const std::string> image_ids;
};

struct BatchOutcome {
  std::string example_id;
  std::optional<ExecOutcome> outcome;  // absent when the example was skipped
  std::optional<std::string> skipped;  // reason, e.g. a MissingGraph message
};

struct BatchOptions {
  ExecOptions exec;
  int jobs = 0;  // <= 0: OpenMP default
};

std::vector<BatchItem> batch_items_from_examples(std::span<const QaExample> examples);

/// Parallel over items; outcomes are in input order and identical to
/// execute_batch_serial.
std::vector<BatchOutcome> execute_batch(std::span<const BatchItem> items, const GraphStore& graphs,
                                        const AliasDictionary* dict = nullptr,
                                        const BatchOptions& options = {});

/// Reference single-threaded implementation.
std::vector<BatchOutcome> execute_batch_serial(std::span<const BatchItem> items,
                                               const GraphStore& graphs,
                                               const AliasDictionary* dict = nullptr,
                                               const BatchOptions& options = {});

nlohmann::ordered_json outcome_to_json(const BatchOutcome& outcome, GraphSource source,
                                       bool with_trace);

}  // namespace nsvqa
