#include "nsvqa/olf.hpp"

#include <array>
#include <optional>

#include "nsvqa/io.hpp"
#include "program_json.hpp"

namespace nsvqa {

namespace {

constexpr std::array<std::string_view, 32> kOlfOperations{
    "some",
    "all",
    "none",
    "choose_name",
    "choose_attr",
    "choose_relation",
    "query_name",
    "query_attr",
    "verify_attr",
    "with_relation",
    "with_relation_object",
    "filter",
    "relation_between_nouns",
    "find",
    "count",
    "keys",
    "unique_images",
    "group_by_images",
    "scene",
    "exists",
    "logic_or",
    "logic_and",
    "keep_if_values_count_eq",
    "keep_if_values_count_geq",
    "keep_if_values_count_leq",
    "eq",
    "geq",
    "leq",
    "lt",
    "gt",
    "unique",
    "assert_unique",
};

struct Rewrite {
  Op op;
  Qualifier qualifier = Qualifier::None;
  bool negate = false;  // append logic_not after the step
  bool drop = false;    // sanity check removed in favour of the runtime checker
};

std::optional<Rewrite> rewrite_for(std::string_view op) {
  using Q = Qualifier;
  if (op == "some") return Rewrite{Op::Map, Q::Or};
  if (op == "all") return Rewrite{Op::Map, Q::And};
  if (op == "none") return Rewrite{Op::Map, Q::Or, true};
  if (op == "choose_name") return Rewrite{Op::Choose, Q::Name};
  if (op == "choose_attr") return Rewrite{Op::Choose, Q::Attr};
  if (op == "choose_relation" || op == "relation_between_nouns") return Rewrite{Op::Choose, Q::Rel};
  if (op == "query_name") return Rewrite{Op::Query, Q::Name};
  if (op == "query_attr") return Rewrite{Op::Query, Q::Attr};
  if (op == "verify_attr") return Rewrite{Op::Verify, Q::Attr};
  if (op == "with_relation" || op == "with_relation_object") return Rewrite{Op::Filter, Q::Rel};
  if (op == "filter") return Rewrite{Op::Filter, Q::Attr};
  if (op == "keep_if_values_count_eq") return Rewrite{Op::KeepIfValuesCount, Q::Eq};
  if (op == "keep_if_values_count_geq") return Rewrite{Op::KeepIfValuesCount, Q::Geq};
  if (op == "keep_if_values_count_leq") return Rewrite{Op::KeepIfValuesCount, Q::Leq};
  if (op == "eq") return Rewrite{Op::Compare, Q::Eq};
  if (op == "geq") return Rewrite{Op::Compare, Q::Geq};
  if (op == "leq") return Rewrite{Op::Compare, Q::Leq};
  if (op == "lt") return Rewrite{Op::Compare, Q::Lt};
  if (op == "gt") return Rewrite{Op::Compare, Q::Gt};
  if (op == "unique" || op == "assert_unique") return Rewrite{Op::Scene, Q::None, false, true};
  // Kept as-is.
  if (op == "find" || op == "count" || op == "keys" || op == "unique_images" ||
      op == "group_by_images" || op == "scene" || op == "exists" || op == "logic_or" ||
      op == "logic_and") {
    return Rewrite{*op_from_string(op)};
  }
  return std::nullopt;
}

std::vector<ClfStep> translate_block(const std::vector<OlfStep>& steps) {
  std::vector<ClfStep> out;
  // Original index -> index of the translated step that carries its value.
  std::vector<std::size_t> carrier(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const OlfStep& src = steps[i];
    const auto rw = rewrite_for(src.op);
    if (!rw) throw Error(ErrorCode::UnknownOlfOperation, "'" + src.op + "'");
    for (std::size_t d : src.deps) {
      if (d >= i) {
        throw Error(ErrorCode::ForwardDependency,
                    "olf step " + std::to_string(i) + " depends on " + std::to_string(d));
      }
    }
    if (rw->drop) {
      if (src.deps.size() != 1) {
        throw Error(ErrorCode::MalformedOlf,
                    src.op + " at step " + std::to_string(i) + " needs exactly one input");
      }
      carrier[i] = carrier[src.deps[0]];
      continue;
    }
    ClfStep step;
    step.op = rw->op;
    step.qualifier = rw->qualifier;
    step.args = src.args;
    for (std::size_t d : src.deps) step.deps.push_back(carrier[d]);
    if (!src.sub.empty()) step.sub = translate_block(src.sub);
    out.push_back(std::move(step));
    if (rw->negate) {
      out.push_back(ClfStep{Op::LogicNot, Qualifier::None, {}, {out.size() - 1}, {}});
    }
    carrier[i] = out.size() - 1;
  }
  return out;
}

OlfStep olf_step_from_raw(const detail::RawStep& raw) {
  if (raw.qualifier) {
    throw Error(ErrorCode::BadQualifier, "original programs carry no qualifiers: " + raw.op);
  }
  OlfStep step{raw.op, raw.args, raw.deps, {}};
  if (raw.sub) {
    for (const auto& s : *raw.sub) step.sub.push_back(olf_step_from_raw(s));
  }
  return step;
}

nlohmann::ordered_json olf_steps_to_json(const std::vector<OlfStep>& steps) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json j;
    j["op"] = s.op;
    j["args"] = detail::literals_to_json(s.args);
    j["deps"] = s.deps;
    if (!s.sub.empty()) j["sub"] = olf_steps_to_json(s.sub);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

std::span<const std::string_view> olf_operations() { return kOlfOperations; }

OlfProgram olf_program_from_json(const nlohmann::ordered_json& steps) {
  OlfProgram program;
  for (const auto& raw : detail::raw_steps_from_json(steps)) {
    program.steps.push_back(olf_step_from_raw(raw));
  }
  if (program.steps.empty()) throw Error(ErrorCode::EmptyProgram, "olf program");
  return program;
}

OlfProgram parse_olf_program(std::string_view text) {
  return olf_program_from_json(parse_json(text, "olf program"));
}

nlohmann::ordered_json olf_program_to_json(const OlfProgram& program) {
  return olf_steps_to_json(program.steps);
}

ClfProgram translate_olf_to_clf(const OlfProgram& program) {
  ClfProgram out{translate_block(program.steps)};
  if (out.steps.empty()) throw Error(ErrorCode::MalformedOlf, "nothing left after translation");
  return out;
}

}  // namespace nsvqa
