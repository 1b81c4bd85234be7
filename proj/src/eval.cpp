#include "nsvqa/eval.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nsvqa/error.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/rng.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

std::optional<double> Rate::value() const {
  if (!defined()) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool Rate::same_as(std::int64_t n, std::int64_t d) const {
  if (!defined() || d <= 0) return false;
  return num * d == n * den;
}

PredictionRecord prediction_from_json(const nlohmann::ordered_json& record) {
  if (!record.is_object()) throw Error(ErrorCode::MalformedFile, "prediction must be an object");
  PredictionRecord p;
  const auto id = record.find("example_id");
  if (id == record.end() || !id->is_string()) {
    throw Error(ErrorCode::MalformedFile, "prediction needs string field 'example_id'");
  }
  p.example_id = id->get<std::string>();
  if (auto it = record.find("program"); it != record.end() && !it->is_null()) {
    // Either the program text or the step list itself.
    p.program = it->is_string() ? it->get<std::string>() : it->dump();
  }
  if (auto it = record.find("answer"); it != record.end() && !it->is_null()) {
    if (it->is_string()) {
      p.answer = normalize_token(it->get<std::string>());
    } else if (it->is_boolean()) {
      p.answer = it->get<bool>() ? "yes" : "no";
    } else if (it->is_number_integer()) {
      p.answer = std::to_string(it->get<std::int64_t>());
    } else {
      throw Error(ErrorCode::MalformedFile, p.example_id + ": answer must be a string");
    }
  }
  if (auto it = record.find("system"); it != record.end() && it->is_string()) {
    p.system = it->get<std::string>();
  }
  if (!p.program && !p.answer) {
    throw Error(ErrorCode::MalformedFile, p.example_id + ": prediction has neither program nor answer");
  }
  return p;
}

nlohmann::ordered_json prediction_to_json(const PredictionRecord& p) {
  nlohmann::ordered_json j;
  j["example_id"] = p.example_id;
  if (p.program) j["program"] = *p.program;
  if (p.answer) j["answer"] = *p.answer;
  if (!p.system.empty()) j["system"] = p.system;
  return j;
}

std::vector<PredictionRecord> parse_predictions(std::string_view jsonl, std::string_view origin) {
  std::vector<PredictionRecord> out;
  for (const auto& r : parse_json_lines(jsonl, origin)) out.push_back(prediction_from_json(r));
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path), path.string());
}

std::string template_key(const QaExample& example) {
  return example.template_id ? *example.template_id : std::string(kUntemplated);
}

namespace {

std::unordered_map<std::string, const PredictionRecord*> index_predictions(
    std::span<const PredictionRecord> predictions) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : predictions) by_id.emplace(p.example_id, &p);  // first record wins
  return by_id;
}

std::optional<ClfProgram> parse_executable(const std::string& text) {
  try {
    ClfProgram program = parse_program(text);
    if (!validate(program).executable()) return std::nullopt;
    return program;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

ExecScore summarize_exec(std::span<const ExampleExecResult> results) {
  ExecScore s;
  for (const auto& r : results) {
    switch (r.status) {
      case ExecStatus::Skipped:
        ++s.skipped;
        continue;
      case ExecStatus::Correct:
        ++s.accuracy.num;
        break;
      case ExecStatus::Fatal:
        ++s.missing_object_ratio.num;
        break;
      case ExecStatus::Unparseable:
        ++s.unparseable;
        break;
      case ExecStatus::Wrong:
        break;
    }
    ++s.accuracy.den;
    ++s.missing_object_ratio.den;
  }
  s.per_example.assign(results.begin(), results.end());
  return s;
}

ExecScore score_exec(std::span<const PredictionRecord> predictions,
                     std::span<const QaExample> examples, const GraphStore& graphs,
                     const AliasDictionary* dict, const ExecScoreOptions& options) {
  const auto by_id = index_predictions(predictions);
  std::vector<ExampleExecResult> results(examples.size());
  std::vector<std::optional<ClfProgram>> programs(examples.size());
  std::vector<BatchItem> items;
  std::vector<std::size_t> item_example;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const QaExample& ex = examples[i];
    results[i].example_id = ex.example_id;
    results[i].template_key = template_key(ex);
    if (options.use_gold_programs) {
      if (!ex.program) continue;
      programs[i] = ex.program;
    } else {
      const auto it = by_id.find(ex.example_id);
      if (it == by_id.end() || !it->second->program) continue;
      programs[i] = parse_executable(*it->second->program);
      if (!programs[i]) {
        results[i].status = ExecStatus::Unparseable;
        continue;
      }
    }
    items.push_back({ex.example_id, &*programs[i], ex.image_ids});
    item_example.push_back(i);
  }
  BatchOptions batch;
  batch.jobs = options.jobs;
  const auto outcomes = options.jobs == 1 ? execute_batch_serial(items, graphs, dict, batch)
                                          : execute_batch(items, graphs, dict, batch);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    ExampleExecResult& r = results[item_example[k]];
    const QaExample& ex = examples[item_example[k]];
    const BatchOutcome& o = outcomes[k];
    if (!o.outcome) continue;  // missing graph
    if (o.outcome->fatal) {
      r.status = ExecStatus::Fatal;
      continue;
    }
    r.answer = o.outcome->answer;
    r.status = r.answer == ex.answer ? ExecStatus::Correct : ExecStatus::Wrong;
  }
  return summarize_exec(results);
}

ExactScore score_exact(std::span<const PredictionRecord> predictions,
                       std::span<const QaExample> examples) {
  const auto by_id = index_predictions(predictions);
  ExactScore s;
  for (const auto& ex : examples) {
    const auto it = by_id.find(ex.example_id);
    if (it == by_id.end() || !it->second->program) continue;
    if (!ex.program) {
      ++s.skipped_no_gold;
      continue;
    }
    bool match = false;
    try {
      match = exact_match(parse_program(*it->second->program), *ex.program);
    } catch (const Error&) {
      match = false;
    }
    s.per_example[ex.example_id] = match;
    s.rate.num += match ? 1 : 0;
    ++s.rate.den;
  }
  if (s.skipped_no_gold > 0) {
    std::cerr << "warning: " << s.skipped_no_gold
              << " example(s) without a gold program skipped for exact match\n";
  }
  return s;
}

Rate score_answers(std::span<const PredictionRecord> predictions,
                   std::span<const QaExample> examples) {
  const auto by_id = index_predictions(predictions);
  Rate r;
  for (const auto& ex : examples) {
    const auto it = by_id.find(ex.example_id);
    if (it == by_id.end() || !it->second->answer) continue;
    r.num += normalize_token(*it->second->answer) == ex.answer ? 1 : 0;
    ++r.den;
  }
  return r;
}

Rate score_local_coherency(const std::map<std::string, std::string>& original_answers,
                           const std::map<std::string, std::string>& contrast_answers,
                           std::span<const CoherencyPair> pairs) {
  Rate r;
  for (const auto& pair : pairs) {
    const auto a = original_answers.find(pair.original_id);
    if (a == original_answers.end()) {
      throw Error(ErrorCode::UnpairedRecord, "no prediction for original " + pair.original_id);
    }
    const auto b = contrast_answers.find(pair.contrast_id);
    if (b == contrast_answers.end()) {
      throw Error(ErrorCode::UnpairedRecord, "no prediction for contrast " + pair.contrast_id);
    }
    r.num += a->second == b->second ? 1 : 0;
    ++r.den;
  }
  return r;
}

std::pair<std::vector<QaExample>, std::vector<QaExample>> cross_benchmark_filter(
    std::span<const QaExample> a, std::span<const QaExample> b) {
  std::unordered_set<std::string> answers_a, answers_b;
  for (const auto& ex : a) answers_a.insert(ex.answer);
  for (const auto& ex : b) answers_b.insert(ex.answer);
  std::pair<std::vector<QaExample>, std::vector<QaExample>> out;
  for (const auto& ex : a) {
    if (answers_b.contains(ex.answer)) out.first.push_back(ex);
  }
  for (const auto& ex : b) {
    if (answers_a.contains(ex.answer)) out.second.push_back(ex);
  }
  return out;
}

std::vector<QaExample> few_shot_augment(std::span<const QaExample> train,
                                        std::span<const QaExample> contrast, std::size_t k,
                                        std::uint64_t seed) {
  if (k > contrast.size()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds contrast set size " +
                                          std::to_string(contrast.size()));
  }
  std::vector<QaExample> out(train.begin(), train.end());
  if (k == 0) return out;
  std::vector<std::size_t> order(contrast.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "few_shot", k));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  for (std::size_t i = 0; i < k; ++i) {
    QaExample ex = contrast[order[i]];
    ex.provenance.tag = "few_shot";
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

std::map<std::string, std::string> answers_for(std::span<const PredictionRecord> predictions,
                                               const std::map<std::string, const QaExample*>& images_of,
                                               const GraphStore* graphs,
                                               const AliasDictionary* dict) {
  std::map<std::string, std::string> out;
  for (const auto& p : predictions) {
    if (p.answer) {
      out.emplace(p.example_id, *p.answer);
      continue;
    }
    if (!p.program || !graphs) continue;
    const auto ex = images_of.find(p.example_id);
    if (ex == images_of.end()) continue;
    const auto program = parse_executable(*p.program);
    std::string answer;  // unparseable or fatal runs share the empty answer
    if (program) {
      try {
        const ExecOutcome o = execute(*program, make_image_set(*graphs, ex->second->image_ids), dict);
        answer = o.answer.value_or("");
      } catch (const Error&) {
        continue;
      }
    }
    out.emplace(p.example_id, std::move(answer));
  }
  return out;
}

MetricRow make_row(const std::string& split, const std::string& key, std::size_t n) {
  MetricRow row;
  row.split = split;
  row.template_key = key;
  row.n = n;
  return row;
}

}  // namespace

MetricReport evaluate(const EvalInputs& in) {
  std::map<std::string, std::vector<std::size_t>> by_template;
  for (std::size_t i = 0; i < in.examples.size(); ++i) {
    by_template[template_key(in.examples[i])].push_back(i);
  }
  const bool with_programs = std::any_of(in.predictions.begin(), in.predictions.end(),
                                         [](const auto& p) { return p.program.has_value(); });
  const bool with_answers = std::any_of(in.predictions.begin(), in.predictions.end(),
                                        [](const auto& p) { return p.answer.has_value(); });

  ExecScoreOptions gen_opts;
  gen_opts.jobs = in.jobs;
  ExecScoreOptions gt_opts = gen_opts;
  gt_opts.use_gold_programs = in.gt_exec_gold_programs;

  std::optional<ExecScore> gen, gt;
  if (with_programs && in.generated_graphs) {
    gen = score_exec(in.predictions, in.examples, *in.generated_graphs, in.dict, gen_opts);
  }
  if ((with_programs || in.gt_exec_gold_programs) && in.gold_graphs) {
    gt = score_exec(in.predictions, in.examples, *in.gold_graphs, in.dict, gt_opts);
  }

  // Coherency per original template.
  std::map<std::string, std::vector<CoherencyPair>> pairs_by_template;
  std::optional<std::map<std::string, std::string>> orig_answers, contrast_answers;
  if (!in.pairs.empty()) {
    std::map<std::string, const QaExample*> originals;
    for (const auto& ex : in.examples) originals.emplace(ex.example_id, &ex);
    std::map<std::string, const QaExample*> contrast_images;
    for (const auto& pair : in.pairs) {
      const auto it = originals.find(pair.original_id);
      if (it == originals.end()) {
        throw Error(ErrorCode::UnpairedRecord, "pair original not in split: " + pair.original_id);
      }
      contrast_images.emplace(pair.contrast_id, it->second);
      pairs_by_template[template_key(*it->second)].push_back(pair);
    }
    const GraphStore* graphs = in.generated_graphs ? in.generated_graphs : in.gold_graphs;
    orig_answers = answers_for(in.predictions, originals, graphs, in.dict);
    contrast_answers = answers_for(in.contrast_predictions, contrast_images, graphs, in.dict);
  }

  auto fill = [&](MetricRow& row, std::span<const std::size_t> idx,
                  std::span<const CoherencyPair> pairs) {
    std::vector<QaExample> subset;
    subset.reserve(idx.size());
    for (auto i : idx) subset.push_back(in.examples[i]);
    if (with_answers) row.accuracy = score_answers(in.predictions, subset);
    if (gen) {
      std::vector<ExampleExecResult> rs;
      for (auto i : idx) rs.push_back(gen->per_example[i]);
      const ExecScore s = summarize_exec(rs);
      row.gen_exec = s.accuracy;
      row.missing_object_ratio = s.missing_object_ratio;
    }
    if (gt) {
      std::vector<ExampleExecResult> rs;
      for (auto i : idx) rs.push_back(gt->per_example[i]);
      const ExecScore s = summarize_exec(rs);
      row.gt_exec = s.accuracy;
      if (!gen) row.missing_object_ratio = s.missing_object_ratio;
    }
    // Program-only systems answer by execution.
    if (!with_answers) row.accuracy = row.gen_exec ? row.gen_exec : row.gt_exec;
    if (with_programs) {
      const ExactScore e = score_exact(in.predictions, subset);
      if (e.rate.defined()) row.exact = e.rate;
    }
    if (orig_answers) {
      row.local_coherency = score_local_coherency(*orig_answers, *contrast_answers, pairs);
    }
  };

  MetricReport report;
  for (const auto& [key, idx] : by_template) {
    MetricRow row = make_row(in.split, key, idx.size());
    const auto pit = pairs_by_template.find(key);
    const std::span<const CoherencyPair> pairs =
        pit == pairs_by_template.end() ? std::span<const CoherencyPair>{} : pit->second;
    fill(row, idx, pairs);
    report.rows.push_back(std::move(row));
  }
  if (by_template.size() > 1) {
    std::vector<std::size_t> all(in.examples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    MetricRow row = make_row(in.split, "all", all.size());
    fill(row, all, in.pairs);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_rate(const std::optional<Rate>& rate) {
  if (!rate || !rate->defined()) return "";
  const double v = *rate->value();
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

constexpr const char* kColumns[] = {"split",    "template",        "n",
                                    "accuracy", "gen_exec",        "gt_exec",
                                    "exact",    "local_coherency", "missing_object_ratio"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::optional<Rate>> metrics_of(const MetricRow& r) {
  return {r.accuracy, r.gen_exec, r.gt_exec, r.exact, r.local_coherency, r.missing_object_ratio};
}

}  // namespace

std::string report_to_csv(const MetricReport& report) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kColumns); ++i) {
    out += (i ? "," : "");
    out += kColumns[i];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    out += csv_field(row.split) + "," + csv_field(row.template_key) + "," + std::to_string(row.n);
    for (const auto& m : metrics_of(row)) out += "," + format_rate(m);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json report_to_json(const MetricReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json j;
    j["split"] = row.split;
    j["template"] = row.template_key;
    j["n"] = row.n;
    const auto metrics = metrics_of(row);
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      const auto& m = metrics[i];
      if (!m || !m->defined()) continue;
      j[kColumns[i + 3]] = {{"value", *m->value()}, {"num", m->num}, {"den", m->den}};
    }
    rows.push_back(std::move(j));
  }
  return {{"rows", std::move(rows)}};
}

std::string render_table(const MetricReport& report) {
  auto pct = [](const std::optional<Rate>& r) -> std::string {
    if (!r || !r->defined()) return "-";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << 100.0 * *r->value();
    return os.str();
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"split", "template", "n", "acc", "exec [gt]", "exact", "coherency", "missing"});
  for (const auto& row : report.rows) {
    cells.push_back({row.split, row.template_key, std::to_string(row.n), pct(row.accuracy),
                     pct(row.gen_exec) + " [" + pct(row.gt_exec) + "]", pct(row.exact),
                     pct(row.local_coherency), pct(row.missing_object_ratio)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out += line[c];
      if (c + 1 < line.size()) out += std::string(width[c] - line[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

void emit_report(const MetricReport& report, const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::Csv ? report_to_csv(report)
                                                    : report_to_json(report).dump(2) + "\n");
}

}  // namespace nsvqa
