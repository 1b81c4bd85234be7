#include <cctype>

#include "nsvqa/error.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/io.hpp"
#include "nsvqa/testgen.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

std::string_view to_string(Meaning m) { return m == Meaning::Preserving ? "preserving" : "altering"; }

std::string_view to_string(LabelTransform t) {
  switch (t) {
    case LabelTransform::Identity: return "identity";
    case LabelTransform::Flip: return "flip";
    case LabelTransform::ReExecute: return "re-execute";
  }
  return "?";
}

std::string_view to_string(ProgramRewrite r) {
  switch (r) {
    case ProgramRewrite::None: return "none";
    case ProgramRewrite::GeqToLt: return "geq_to_lt";
    case ProgramRewrite::GeqToNotLt: return "geq_to_not_lt";
    case ProgramRewrite::NegateFinal: return "negate_final";
    case ProgramRewrite::DropFinalNot: return "drop_final_not";
  }
  return "?";
}

bool is_counting_template(std::string_view template_id) {
  return template_id.starts_with("Count");
}

std::vector<ContrastRule> builtin_contrast_rules() {
  using M = Meaning;
  using L = LabelTransform;
  using R = ProgramRewrite;
  auto rule = [](std::string tmpl, std::string from, std::string to, M m, L l, R r) {
    return ContrastRule{from + " -> " + to + " (" + tmpl + ")", std::move(tmpl), from, to, m, l, r};
  };
  const std::string cgb(kCountGroupBy);
  const std::string vc(kVerifyCount);
  const std::string vcgb(kVerifyCountGroupBy);
  const std::string q(kQuantifier);
  return {
      rule(cgb, "at least", "no less than", M::Preserving, L::Identity, R::None),
      rule(vc, "at least", "no less than", M::Preserving, L::Identity, R::GeqToNotLt),
      rule(vcgb, "at least", "no less than", M::Preserving, L::Identity, R::GeqToNotLt),
      rule(vc, "at least", "less than", M::Altering, L::Flip, R::GeqToLt),
      rule(vcgb, "at least", "less than", M::Altering, L::Flip, R::GeqToLt),
      rule(q, "no", "some", M::Altering, L::Flip, R::DropFinalNot),
      rule(q, "some", "no", M::Altering, L::Flip, R::NegateFinal),
      rule(q, "no", "at least one", M::Altering, L::Flip, R::DropFinalNot),
      rule(q, "some", "none of the", M::Altering, L::Flip, R::NegateFinal),
      rule(q, "all", "either none or only some", M::Altering, L::Flip, R::NegateFinal),
  };
}

namespace {

template <typename E, std::size_t N>
E enum_from(std::string_view text, const E (&values)[N], const char* what) {
  for (E v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::MalformedFile, std::string("unknown ") + what + " '" + std::string(text) + "'");
}

std::string rule_string(const nlohmann::ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedFile, std::string("rule needs string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

void check_rule(const ContrastRule& rule) {
  if (rule.meaning == Meaning::Preserving && rule.label_transform != LabelTransform::Identity) {
    throw Error(ErrorCode::MalformedFile, rule.name + ": preserving rules keep the label");
  }
  if (rule.source_phrase.empty()) throw Error(ErrorCode::MalformedFile, rule.name + ": empty phrase");
}

std::vector<ContrastRule> contrast_rules_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::MalformedFile, "rules file must be a list");
  static constexpr Meaning kMeanings[] = {Meaning::Preserving, Meaning::Altering};
  static constexpr LabelTransform kTransforms[] = {LabelTransform::Identity, LabelTransform::Flip,
                                                   LabelTransform::ReExecute};
  static constexpr ProgramRewrite kRewrites[] = {ProgramRewrite::None, ProgramRewrite::GeqToLt,
                                                 ProgramRewrite::GeqToNotLt,
                                                 ProgramRewrite::NegateFinal,
                                                 ProgramRewrite::DropFinalNot};
  std::vector<ContrastRule> rules;
  for (const auto& j : doc) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedFile, "rule must be an object");
    ContrastRule r;
    r.template_id = rule_string(j, "template");
    r.source_phrase = rule_string(j, "source");
    r.replacement_phrase = rule_string(j, "replacement");
    r.meaning = enum_from(rule_string(j, "meaning"), kMeanings, "meaning");
    r.label_transform = enum_from(rule_string(j, "label_transform"), kTransforms, "label transform");
    if (auto it = j.find("rewrite"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::MalformedFile, "rewrite must be a string");
      r.program_rewrite = enum_from(it->get<std::string>(), kRewrites, "rewrite");
    }
    r.name = j.contains("name") ? rule_string(j, "name")
                                : r.source_phrase + " -> " + r.replacement_phrase + " (" +
                                      r.template_id + ")";
    check_rule(r);
    rules.push_back(std::move(r));
  }
  return rules;
}

nlohmann::ordered_json contrast_rules_to_json(std::span<const ContrastRule> rules) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rules) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["template"] = r.template_id;
    j["source"] = r.source_phrase;
    j["replacement"] = r.replacement_phrase;
    j["meaning"] = to_string(r.meaning);
    j["label_transform"] = to_string(r.label_transform);
    if (r.program_rewrite) j["rewrite"] = to_string(*r.program_rewrite);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<ContrastRule> load_contrast_rules(const std::filesystem::path& path) {
  return contrast_rules_from_json(parse_json(read_text_file(path), path.string()));
}

ClfProgram apply_program_rewrite(const ClfProgram& program, ProgramRewrite rewrite) {
  ClfProgram out = program;
  auto& steps = out.steps;
  auto last_geq = [&]() -> std::size_t {
    for (std::size_t i = steps.size(); i-- > 0;) {
      if (steps[i].op == Op::Compare && steps[i].qualifier == Qualifier::Geq) return i;
    }
    throw Error(ErrorCode::RewriteNotApplicable, "no compare(geq) step");
  };
  switch (rewrite) {
    case ProgramRewrite::None:
      break;
    case ProgramRewrite::GeqToLt:
      steps[last_geq()].qualifier = Qualifier::Lt;
      break;
    case ProgramRewrite::GeqToNotLt: {
      const std::size_t at = last_geq();
      steps[at].qualifier = Qualifier::Lt;
      // Insert logic_not right after and point later consumers at it.
      for (std::size_t i = at + 1; i < steps.size(); ++i) {
        for (auto& d : steps[i].deps) {
          if (d >= at) ++d;
        }
      }
      steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                   ClfStep{Op::LogicNot, Qualifier::None, {}, {at}, {}});
      break;
    }
    case ProgramRewrite::NegateFinal:
      steps.push_back(ClfStep{Op::LogicNot, Qualifier::None, {}, {steps.size() - 1}, {}});
      break;
    case ProgramRewrite::DropFinalNot: {
      const ClfStep& last = steps.back();
      if (last.op != Op::LogicNot || last.deps.size() != 1 || steps.size() < 2 ||
          last.deps[0] != steps.size() - 2) {
        throw Error(ErrorCode::RewriteNotApplicable, "final step is not logic_not over the previous step");
      }
      steps.pop_back();
      break;
    }
  }
  check_structure(out);
  return out;
}

std::optional<std::string> substitute_phrase(std::string_view text, std::string_view phrase,
                                             std::string_view replacement) {
  std::string lower_text(text);
  for (auto& c : lower_text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const std::string lower_phrase = normalize_token(phrase);
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t pos = 0;
  while ((pos = lower_text.find(lower_phrase, pos)) != std::string::npos) {
    const std::size_t end = pos + lower_phrase.size();
    const bool left_ok = pos == 0 || !is_word(text[pos - 1]);
    const bool right_ok = end >= text.size() || !is_word(text[end]);
    if (left_ok && right_ok) {
      std::string repl(replacement);
      if (!repl.empty() && std::isupper(static_cast<unsigned char>(text[pos]))) {
        repl[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0])));
      }
      return std::string(text.substr(0, pos)) + repl + std::string(text.substr(end));
    }
    ++pos;
  }
  return std::nullopt;
}

QaExample apply_contrast_rule(const QaExample& example, const ContrastRule& rule,
                              const GraphStore& gold_graphs, const AliasDictionary* dict) {
  check_rule(rule);
  const std::string tmpl = example.template_id.value_or("");
  if (rule.meaning == Meaning::Altering && is_counting_template(tmpl)) {
    throw Error(ErrorCode::ForbiddenAlteringOnCounting, rule.name + " on " + example.example_id);
  }
  auto question = substitute_phrase(example.question, rule.source_phrase, rule.replacement_phrase);
  if (!question) {
    throw Error(ErrorCode::PhraseNotFound,
                "'" + rule.source_phrase + "' in " + example.example_id + ": " + example.question);
  }

  QaExample out = example;
  out.example_id = example.example_id + "#" + rule.name;
  out.question = std::move(*question);
  out.provenance = Provenance{};
  out.provenance.source_example_id = example.example_id;
  out.provenance.rule = rule.name;

  std::optional<std::string> transformed;
  switch (rule.label_transform) {
    case LabelTransform::Identity:
      transformed = example.answer;
      break;
    case LabelTransform::Flip:
      if (example.answer != "yes" && example.answer != "no") {
        throw Error(ErrorCode::NonBinaryAnswer, example.example_id + ": '" + example.answer + "'");
      }
      transformed = example.answer == "yes" ? "no" : "yes";
      break;
    case LabelTransform::ReExecute:
      break;
  }

  const bool needs_execution =
      rule.program_rewrite.has_value() || rule.label_transform == LabelTransform::ReExecute;
  if (needs_execution) {
    if (!example.program) {
      throw Error(ErrorCode::LabelTransformConflict, example.example_id + ": no gold program");
    }
    const ClfProgram rewritten =
        apply_program_rewrite(*example.program, rule.program_rewrite.value_or(ProgramRewrite::None));
    const ExecOutcome outcome =
        execute(rewritten, make_image_set(gold_graphs, example.image_ids), dict);
    if (outcome.fatal || !outcome.answer) {
      throw Error(ErrorCode::LabelTransformConflict,
                  example.example_id + ": rewritten program failed to execute");
    }
    if (transformed && *transformed != *outcome.answer) {
      throw Error(ErrorCode::LabelTransformConflict,
                  out.example_id + ": label rule gives '" + *transformed +
                      "' but re-execution gives '" + *outcome.answer + "'");
    }
    transformed = *outcome.answer;
    out.program = rewritten;
  }
  out.answer = *transformed;
  return out;
}

std::vector<QaExample> gen_contrast_set(const QaExample& example,
                                        std::span<const ContrastRule> rules,
                                        const GraphStore& gold_graphs,
                                        const AliasDictionary* dict) {
  std::vector<QaExample> out;
  bool template_matched = false;
  for (const auto& rule : rules) {
    if (!example.template_id || *example.template_id != rule.template_id) continue;
    template_matched = true;
    if (rule.meaning == Meaning::Altering && is_counting_template(rule.template_id)) {
      throw Error(ErrorCode::ForbiddenAlteringOnCounting, rule.name + " on " + example.example_id);
    }
    if (!substitute_phrase(example.question, rule.source_phrase, rule.replacement_phrase)) continue;
    out.push_back(apply_contrast_rule(example, rule, gold_graphs, dict));
  }
  if (template_matched && out.empty()) {
    throw Error(ErrorCode::PhraseNotFound, example.example_id + ": no rule phrase in question");
  }
  return out;
}

CoherencyPair pair_for_coherency(const QaExample& original, const QaExample& contrast) {
  if (original.image_ids != contrast.image_ids) {
    throw Error(ErrorCode::MismatchedPair,
                original.example_id + " and " + contrast.example_id + " use different images");
  }
  if (contrast.provenance.source_example_id &&
      *contrast.provenance.source_example_id != original.example_id) {
    throw Error(ErrorCode::MismatchedPair,
                contrast.example_id + " was not derived from " + original.example_id);
  }
  return {original.example_id, contrast.example_id, contrast.provenance.rule.value_or("")};
}

std::vector<CoherencyPair> pair_contrast_set(std::span<const QaExample> originals,
                                             std::span<const QaExample> contrasts) {
  std::vector<CoherencyPair> out;
  out.reserve(contrasts.size());
  for (const auto& c : contrasts) {
    const QaExample* origin = nullptr;
    for (const auto& o : originals) {
      if (c.provenance.source_example_id && o.example_id == *c.provenance.source_example_id) {
        origin = &o;
        break;
      }
    }
    if (!origin) throw Error(ErrorCode::MismatchedPair, c.example_id + ": source not found");
    out.push_back(pair_for_coherency(*origin, c));
  }
  return out;
}

nlohmann::ordered_json pair_to_json(const CoherencyPair& pair) {
  return {{"original_id", pair.original_id}, {"contrast_id", pair.contrast_id}, {"rule", pair.rule}};
}

CoherencyPair pair_from_json(const nlohmann::ordered_json& record) {
  if (!record.is_object() || !record.contains("original_id") || !record.contains("contrast_id") ||
      !record["original_id"].is_string() || !record["contrast_id"].is_string()) {
    throw Error(ErrorCode::MalformedFile, "pair record " + record.dump());
  }
  return {record["original_id"].get<std::string>(), record["contrast_id"].get<std::string>(),
          record.value("rule", std::string{})};
}

std::vector<CoherencyPair> load_pairs(const std::filesystem::path& path) {
  std::vector<CoherencyPair> out;
  for (const auto& r : parse_json_lines(read_text_file(path), path.string())) {
    out.push_back(pair_from_json(r));
  }
  return out;
}

}  // namespace nsvqa
