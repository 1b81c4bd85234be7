#include <omp.h>

#include "nsvqa/error.hpp"
#include "nsvqa/executor.hpp"

namespace nsvqa {

namespace {

BatchOutcome run_item(const BatchItem& item, const GraphStore& graphs, const AliasDictionary* dict,
                      const ExecOptions& exec) {
  BatchOutcome out{item.example_id, std::nullopt, std::nullopt};
  if (!item.program) {
    out.skipped = "no program";
    return out;
  }
  try {
    const ImageSet images = make_image_set(graphs, item.image_ids);
    out.outcome = execute(*item.program, images, dict, exec);
  } catch (const Error& e) {
    out.skipped = e.what();
  }
  return out;
}

}  // namespace

std::vector<BatchItem> batch_items_from_examples(std::span<const QaExample> examples) {
  std::vector<BatchItem> items;
  items.reserve(examples.size());
  for (const auto& ex : examples) {
    items.push_back({ex.example_id, ex.program ? &*ex.program : nullptr, ex.image_ids});
  }
  return items;
}

std::vector<BatchOutcome> execute_batch_serial(std::span<const BatchItem> items,
                                               const GraphStore& graphs,
                                               const AliasDictionary* dict,
                                               const BatchOptions& options) {
  std::vector<BatchOutcome> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(run_item(item, graphs, dict, options.exec));
  return out;
}

std::vector<BatchOutcome> execute_batch(std::span<const BatchItem> items, const GraphStore& graphs,
                                        const AliasDictionary* dict, const BatchOptions& options) {
  std::vector<BatchOutcome> out(items.size());
  const int jobs = options.jobs > 0 ? options.jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = run_item(items[i], graphs, dict, options.exec);
  }
  return out;
}

nlohmann::ordered_json outcome_to_json(const BatchOutcome& outcome, GraphSource source,
                                       bool with_trace) {
  nlohmann::ordered_json j;
  j["example_id"] = outcome.example_id;
  if (!outcome.outcome) {
    j["answer"] = nullptr;
    j["fatal"] = false;
    j["events"] = nlohmann::ordered_json::array();
    j["graphs_source"] = to_string(source);
    j["skipped"] = outcome.skipped.value_or("");
    return j;
  }
  const ExecOutcome& o = *outcome.outcome;
  j["answer"] = o.answer ? nlohmann::ordered_json(*o.answer) : nlohmann::ordered_json(nullptr);
  j["fatal"] = o.fatal;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& e : o.events) events.push_back(to_string(e.kind));
  j["events"] = std::move(events);
  j["graphs_source"] = to_string(source);
  if (with_trace) {
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const auto& t : o.trace) trace.push_back({{"step", t.step_index}, {"value", t.summary}});
    j["trace"] = std::move(trace);
  }
  return j;
}

}  // namespace nsvqa
