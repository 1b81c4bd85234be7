// nsvqa: translate, execute, generate and score CLF programs.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsvqa/alias.hpp"
#include "nsvqa/error.hpp"
#include "nsvqa/eval.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/olf.hpp"
#include "nsvqa/rng.hpp"
#include "nsvqa/testgen.hpp"

namespace fs = std::filesystem;
using namespace nsvqa;

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 1;
constexpr const char* kDataRootVar = "NSVQA_DATA_ROOT";

struct RunConfig {
  std::string in;
  std::string graphs_gold;
  std::string graphs_generated;
  std::string examples;
  std::string predictions;
  std::string contrast_predictions;
  std::string pairs;
  std::string rules;
  std::string dict;
  std::string alignments;
  std::string pool;
  std::string other;
  std::string out;
  std::string pairs_out;
  std::string split = "eval";
  std::string format = "csv";
  std::uint64_t seed = kDefaultSeed;
  int jobs = 0;
  std::size_t k = 1;
  bool trace = false;
  bool gt_gold_programs = false;
};

// Relative inputs that do not exist are looked up under $NSVQA_DATA_ROOT.
fs::path input_path(const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv(kDataRootVar); root && *root) {
    fs::path rooted = fs::path(root) / path;
    if (fs::exists(rooted)) return rooted;
  }
  return path;
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

GraphStore load_graphs(const std::string& p) {
  std::vector<std::string> warnings;
  GraphStore store = load_scene_graphs(input_path(p), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return store;
}

std::optional<AliasDictionary> load_dict(const std::string& p) {
  if (p.empty()) return std::nullopt;
  return load_alias_dictionary(input_path(p));
}

std::vector<QaExample> load_ex(const std::string& p) { return load_examples(input_path(p)); }

int cmd_translate(const RunConfig& c) {
  const std::string text = read_text_file(input_path(c.in));
  std::vector<nlohmann::ordered_json> out;
  std::size_t rejected = 0;
  for (auto record : parse_json_lines(text, c.in)) {
    const bool wrapped = record.is_object();
    nlohmann::ordered_json& steps = wrapped ? record["program"] : record;
    const ClfProgram clf = translate_olf_to_clf(olf_program_from_json(steps));
    if (!validate(clf).executable()) ++rejected;
    steps = program_to_json(clf);
    out.push_back(std::move(record));
  }
  write_output(c.out, dump_json_lines(out));
  if (rejected > 0) std::cerr << "warning: " << rejected << " translated program(s) fail validation\n";
  std::cerr << "translated " << out.size() << " program(s)\n";
  return 0;
}

int cmd_execute(const RunConfig& c) {
  if (c.graphs_gold.empty() == c.graphs_generated.empty()) {
    std::cerr << "error: give exactly one of --graphs-gold or --graphs-generated\n";
    return kUsageError;
  }
  const GraphSource source = c.graphs_gold.empty() ? GraphSource::Generated : GraphSource::Gold;
  const GraphStore graphs = load_graphs(c.graphs_gold.empty() ? c.graphs_generated : c.graphs_gold);
  const auto dict = load_dict(c.dict);
  std::vector<QaExample> examples = load_ex(c.examples);
  if (!c.predictions.empty()) {
    // Predicted programs replace the examples' own programs.
    std::map<std::string, const PredictionRecord*> by_id;
    const auto preds = load_predictions(input_path(c.predictions));
    for (const auto& p : preds) by_id.emplace(p.example_id, &p);
    for (auto& ex : examples) {
      const auto it = by_id.find(ex.example_id);
      ex.program.reset();
      if (it != by_id.end() && it->second->program) {
        try {
          ex.program = parse_program(*it->second->program);
        } catch (const Error& e) {
          std::cerr << "warning: " << ex.example_id << ": " << e.what() << '\n';
        }
      }
    }
  }
  const auto items = batch_items_from_examples(examples);
  BatchOptions options;
  options.jobs = c.jobs;
  options.exec.trace = c.trace;
  const auto outcomes = execute_batch(items, graphs, dict ? &*dict : nullptr, options);
  std::vector<nlohmann::ordered_json> records;
  std::size_t fatal = 0, skipped = 0;
  for (const auto& o : outcomes) {
    if (!o.outcome) ++skipped;
    else if (o.outcome->fatal) ++fatal;
    records.push_back(outcome_to_json(o, source, c.trace));
  }
  write_output(c.out, dump_json_lines(records));
  std::cerr << "executed " << outcomes.size() << " program(s): " << fatal << " fatal, " << skipped
            << " skipped\n";
  return 0;
}

int cmd_build_alias_dict(const RunConfig& c) {
  const GraphStore graphs = load_graphs(c.graphs_gold);
  const auto train = load_ex(c.examples);
  std::optional<AlignmentMap> alignments;
  if (!c.alignments.empty()) alignments = load_alignments(input_path(c.alignments));
  const AliasBuildResult result =
      build_alias_dictionary(train, graphs, alignments ? &*alignments : nullptr);
  for (const auto& u : result.ungroundable) {
    std::cerr << "ungroundable: " << u.example_id << " '" << u.mention << "' (" << u.reason << ")\n";
  }
  write_output(c.out, alias_dictionary_to_json(result.dictionary).dump(2) + "\n");
  std::cerr << result.dictionary.entries().size() << " mention(s), " << result.ungroundable.size()
            << " ungroundable\n";
  return 0;
}

int cmd_gen_segcomb(const RunConfig& c) {
  const GraphStore graphs = load_graphs(c.graphs_gold);
  const auto dict = load_dict(c.dict);
  const auto examples = load_ex(c.examples);
  std::vector<std::string> pool;
  if (c.pool.empty()) {
    pool = graphs.image_ids();
  } else {
    std::istringstream lines(read_text_file(input_path(c.pool)));
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) pool.push_back(line);
    }
  }
  std::vector<QaExample> supported;
  for (const auto& ex : examples) {
    if (ex.template_id && fusion_for_template(*ex.template_id)) supported.push_back(ex);
  }
  const auto results = gen_segment_combine_batch(supported, graphs, pool, c.seed,
                                                 dict ? &*dict : nullptr, c.jobs);
  std::vector<QaExample> derived;
  std::size_t failed = 0, unverified = 0, out_of_range = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.value) {
      ++failed;
      std::cerr << "skipped " << supported[i].example_id << ": " << r.error.value_or("") << '\n';
      continue;
    }
    if (!verify_segment_combine(*r.value, graphs, dict ? &*dict : nullptr)) ++unverified;
    if (r.value->sum_out_of_range) ++out_of_range;
    derived.insert(derived.end(), r.value->derived.begin(), r.value->derived.end());
  }
  write_output(c.out, dump_examples(derived));
  std::cerr << "segment-combine: " << supported.size() << " source(s), " << derived.size()
            << " derived, " << failed << " failed, " << unverified << " not fusion-consistent, "
            << out_of_range << " with sums above " << kMaxCountLabel << '\n';
  return 0;
}

int cmd_gen_contrast(const RunConfig& c) {
  const GraphStore graphs = load_graphs(c.graphs_gold);
  const auto dict = load_dict(c.dict);
  const auto examples = load_ex(c.examples);
  const std::vector<ContrastRule> rules =
      c.rules.empty() ? builtin_contrast_rules() : load_contrast_rules(input_path(c.rules));
  std::vector<QaExample> contrast;
  std::vector<nlohmann::ordered_json> pairs;
  std::size_t failed = 0;
  for (const auto& ex : examples) {
    std::vector<QaExample> generated;
    try {
      generated = gen_contrast_set(ex, rules, graphs, dict ? &*dict : nullptr);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::PhraseNotFound) continue;
      ++failed;
      std::cerr << "skipped " << ex.example_id << ": " << e.what() << '\n';
      continue;
    }
    for (auto& g : generated) {
      pairs.push_back(pair_to_json(pair_for_coherency(ex, g)));
      contrast.push_back(std::move(g));
    }
  }
  write_output(c.out, dump_examples(contrast));
  if (!c.pairs_out.empty()) write_text_file(c.pairs_out, dump_json_lines(pairs));
  std::cerr << "contrast: " << contrast.size() << " example(s) from " << examples.size()
            << " source(s), " << failed << " failed\n";
  return 0;
}

int cmd_eval(const RunConfig& c) {
  if (c.graphs_gold.empty() && c.graphs_generated.empty() && c.predictions.empty()) {
    std::cerr << "error: eval needs predictions or graphs\n";
    return kUsageError;
  }
  const auto examples = load_ex(c.examples);
  std::vector<PredictionRecord> preds;
  if (!c.predictions.empty()) preds = load_predictions(input_path(c.predictions));
  std::optional<GraphStore> gold, generated;
  if (!c.graphs_gold.empty()) gold = load_graphs(c.graphs_gold);
  if (!c.graphs_generated.empty()) generated = load_graphs(c.graphs_generated);
  const auto dict = load_dict(c.dict);
  std::vector<PredictionRecord> contrast_preds;
  std::vector<CoherencyPair> pairs;
  if (!c.pairs.empty()) {
    pairs = load_pairs(input_path(c.pairs));
    if (!c.contrast_predictions.empty()) {
      contrast_preds = load_predictions(input_path(c.contrast_predictions));
    }
  }
  EvalInputs in;
  in.split = c.split;
  in.examples = examples;
  in.predictions = preds;
  in.gold_graphs = gold ? &*gold : nullptr;
  in.generated_graphs = generated ? &*generated : nullptr;
  in.dict = dict ? &*dict : nullptr;
  in.gt_exec_gold_programs = c.gt_gold_programs;
  in.contrast_predictions = contrast_preds;
  in.pairs = pairs;
  in.jobs = c.jobs;
  const MetricReport report = evaluate(in);
  const ReportFormat format = c.format == "json" ? ReportFormat::Json : ReportFormat::Csv;
  if (c.out.empty() || c.out == "-") {
    std::cout << (format == ReportFormat::Csv ? report_to_csv(report)
                                              : report_to_json(report).dump(2) + "\n");
    std::cerr << render_table(report);
  } else {
    emit_report(report, c.out, format);
    std::cout << render_table(report);
  }
  return 0;
}

int cmd_few_shot(const RunConfig& c) {
  const auto train = load_ex(c.examples);
  const auto contrast = load_ex(c.other);
  const auto augmented = few_shot_augment(train, contrast, c.k, c.seed);
  write_output(c.out, dump_examples(augmented));
  std::cerr << "few-shot: " << train.size() << " + " << (augmented.size() - train.size())
            << " example(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic VQA program engine and test generator", "nsvqa"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1);
  RunConfig c;

  auto seed_opt = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  };
  auto jobs_opt = [&](CLI::App* s) {
    s->add_option("--jobs", c.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  };
  auto out_opt = [&](CLI::App* s) { s->add_option("--out", c.out, "Output file (default stdout)"); };

  auto* translate = app.add_subcommand("translate", "Rewrite OLF programs into CLF");
  translate->add_option("--in", c.in, "OLF JSONL: step lists or records with a program field")
      ->required();
  out_opt(translate);

  auto* execute = app.add_subcommand("execute", "Run programs over scene graphs");
  execute->add_option("--examples", c.examples, "Examples JSONL")->required();
  execute->add_option("--predictions", c.predictions, "Run predicted programs instead");
  execute->add_option("--graphs-gold", c.graphs_gold, "Gold scene graphs");
  execute->add_option("--graphs-generated", c.graphs_generated, "Generated scene graphs");
  execute->add_option("--dict", c.dict, "Alias dictionary");
  execute->add_flag("--trace", c.trace, "Emit per-step traces");
  jobs_opt(execute);
  out_opt(execute);

  auto* alias = app.add_subcommand("build-alias-dict", "Build the alias dictionary from training programs");
  alias->add_option("--examples", c.examples, "Training examples JSONL")->required();
  alias->add_option("--graphs-gold", c.graphs_gold, "Gold scene graphs")->required();
  alias->add_option("--alignments", c.alignments, "Sidecar mention/object alignments");
  out_opt(alias);

  auto* segcomb = app.add_subcommand("gen-segcomb", "Generate segment-combine tests");
  segcomb->add_option("--examples", c.examples, "Source examples JSONL")->required();
  segcomb->add_option("--graphs-gold", c.graphs_gold, "Gold scene graphs")->required();
  segcomb->add_option("--pool", c.pool, "Distractor image ids, one per line (default: all)");
  segcomb->add_option("--dict", c.dict, "Alias dictionary");
  seed_opt(segcomb);
  jobs_opt(segcomb);
  out_opt(segcomb);

  auto* contrast = app.add_subcommand("gen-contrast", "Generate quantifier contrast sets");
  contrast->add_option("--examples", c.examples, "Source examples JSONL")->required();
  contrast->add_option("--graphs-gold", c.graphs_gold, "Gold scene graphs")->required();
  contrast->add_option("--rules", c.rules, "Rules JSON (default: built-in rules)");
  contrast->add_option("--dict", c.dict, "Alias dictionary");
  contrast->add_option("--pairs-out", c.pairs_out, "Coherency pairs JSONL");
  out_opt(contrast);

  auto* eval = app.add_subcommand("eval", "Score predictions");
  eval->add_option("--examples", c.examples, "Gold examples JSONL")->required();
  eval->add_option("--predictions", c.predictions, "Predictions JSONL");
  eval->add_option("--graphs-gold", c.graphs_gold, "Gold scene graphs (GTExec)");
  eval->add_option("--graphs-generated", c.graphs_generated, "Generated scene graphs (GenExec)");
  eval->add_option("--dict", c.dict, "Alias dictionary");
  eval->add_option("--pairs", c.pairs, "Coherency pairs JSONL");
  eval->add_option("--contrast-predictions", c.contrast_predictions, "Predictions on the contrast set");
  eval->add_option("--split", c.split, "Split name for the report")->capture_default_str();
  eval->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  eval->add_flag("--gt-gold-programs", c.gt_gold_programs, "GTExec runs gold programs");
  jobs_opt(eval);
  out_opt(eval);

  auto* few_shot = app.add_subcommand("few-shot", "Append k contrast examples to a training set");
  few_shot->add_option("--examples", c.examples, "Training examples JSONL")->required();
  few_shot->add_option("--contrast", c.other, "Contrast examples JSONL")->required();
  few_shot->add_option("--k", c.k, "Examples to add")->required();
  seed_opt(few_shot);
  out_opt(few_shot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : kUsageError;
  }

  try {
    if (*translate) return cmd_translate(c);
    if (*execute) return cmd_execute(c);
    if (*alias) return cmd_build_alias_dict(c);
    if (*segcomb) return cmd_gen_segcomb(c);
    if (*contrast) return cmd_gen_contrast(c);
    if (*eval) return cmd_eval(c);
    if (*few_shot) return cmd_few_shot(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
