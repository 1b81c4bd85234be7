#include "nsvqa/clf.hpp"

#include <algorithm>
#include <array>

#include "nsvqa/io.hpp"
#include "nsvqa/text.hpp"
#include "program_json.hpp"

namespace nsvqa {

namespace {

constexpr std::array<std::pair<Op, std::string_view>, kClfOperationCount> kOpNames{{
    {Op::Find, "find"},
    {Op::Scene, "scene"},
    {Op::Filter, "filter"},
    {Op::Choose, "choose"},
    {Op::Query, "query"},
    {Op::Verify, "verify"},
    {Op::Map, "map"},
    {Op::LogicNot, "logic_not"},
    {Op::LogicOr, "logic_or"},
    {Op::LogicAnd, "logic_and"},
    {Op::Count, "count"},
    {Op::Exists, "exists"},
    {Op::Keys, "keys"},
    {Op::UniqueImages, "unique_images"},
    {Op::GroupByImages, "group_by_images"},
    {Op::KeepIfValuesCount, "keep_if_values_count"},
    {Op::Compare, "compare"},
}};

constexpr std::array<std::pair<Qualifier, std::string_view>, 11> kQualifierNames{{
    {Qualifier::None, ""},
    {Qualifier::Name, "name"},
    {Qualifier::Attr, "attr"},
    {Qualifier::Rel, "rel"},
    {Qualifier::Or, "or"},
    {Qualifier::And, "and"},
    {Qualifier::Eq, "eq"},
    {Qualifier::Geq, "geq"},
    {Qualifier::Leq, "leq"},
    {Qualifier::Lt, "lt"},
    {Qualifier::Gt, "gt"},
}};

enum class ArgKind { None, Token, Int };

using TypeSet = std::vector<ValueType>;

// Argument/dependency shape of one (op, qualifier) pair.
struct Signature {
  ArgKind arg_kind = ArgKind::None;
  std::size_t min_args = 0;
  std::size_t max_args = 0;
  std::size_t min_deps = 0;
  std::size_t max_deps = 0;
  std::vector<TypeSet> dep_types;  // one entry per dependency position
  std::size_t max_operands = 0;    // args + deps cap; 0 means unconstrained
  std::size_t wanted_operands = 0; // Int/Bool operands that get defaulted when missing
  bool needs_sub = false;
  ValueType result = ValueType::ObjectSet;
};

const TypeSet kObj{ValueType::ObjectSet};
const TypeSet kGrouped{ValueType::GroupedObjects};
const TypeSet kObjOrGrouped{ValueType::ObjectSet, ValueType::GroupedObjects};
const TypeSet kAnySet{ValueType::ObjectSet, ValueType::GroupedObjects, ValueType::TokenSet};
const TypeSet kBool{ValueType::Boolean};
const TypeSet kInt{ValueType::Integer};

std::vector<Qualifier> legal_qualifiers(Op op) {
  switch (op) {
    case Op::Filter: return {Qualifier::Attr, Qualifier::Rel};
    case Op::Choose: return {Qualifier::Name, Qualifier::Attr, Qualifier::Rel};
    case Op::Query: return {Qualifier::Name, Qualifier::Attr};
    case Op::Verify: return {Qualifier::Attr};
    case Op::Map: return {Qualifier::Or, Qualifier::And};
    case Op::KeepIfValuesCount: return {Qualifier::Eq, Qualifier::Geq, Qualifier::Leq};
    case Op::Compare:
      return {Qualifier::Eq, Qualifier::Geq, Qualifier::Leq, Qualifier::Lt, Qualifier::Gt};
    default: return {};
  }
}

Signature signature(Op op, Qualifier q) {
  Signature s;
  switch (op) {
    case Op::Find:
      s = {ArgKind::Token, 1, 1, 0, 1, {kObj}};
      break;
    case Op::Scene:
      s = {ArgKind::None, 0, 0, 0, 0, {}};
      break;
    case Op::Filter:
      if (q == Qualifier::Rel) {
        s = {ArgKind::Token, 1, 1, 1, 2, {kObj, kObj}};
      } else {
        s = {ArgKind::Token, 1, 1, 1, 1, {kObj}};
      }
      break;
    case Op::Choose:
      if (q == Qualifier::Rel) {
        s = {ArgKind::Token, 2, 2, 1, 2, {kObj, kObj}};
      } else {
        s = {ArgKind::Token, 2, 2, 1, 1, {kObj}};
      }
      s.result = ValueType::String;
      break;
    case Op::Query:
      s = {ArgKind::Token, 0, q == Qualifier::Attr ? 1u : 0u, 1, 1, {kObj}};
      s.result = ValueType::String;
      break;
    case Op::Verify:
      s = {ArgKind::Token, 1, 1, 1, 1, {kObj}};
      s.result = ValueType::Boolean;
      break;
    case Op::Map:
      s = {ArgKind::None, 0, 0, 1, 1, {kObjOrGrouped}};
      s.needs_sub = true;
      s.result = ValueType::Boolean;
      break;
    case Op::LogicNot:
      s = {ArgKind::None, 0, 0, 0, 1, {kBool}};
      s.wanted_operands = 1;
      s.result = ValueType::Boolean;
      break;
    case Op::LogicOr:
    case Op::LogicAnd:
      s = {ArgKind::None, 0, 0, 0, 2, {kBool, kBool}};
      s.wanted_operands = 2;
      s.result = ValueType::Boolean;
      break;
    case Op::Count:
      s = {ArgKind::None, 0, 0, 1, 1, {kAnySet}};
      s.result = ValueType::Integer;
      break;
    case Op::Exists:
      s = {ArgKind::None, 0, 0, 1, 1, {kAnySet}};
      s.result = ValueType::Boolean;
      break;
    case Op::Keys:
      s = {ArgKind::None, 0, 0, 1, 1, {kGrouped}};
      s.result = ValueType::TokenSet;
      break;
    case Op::UniqueImages:
      s = {ArgKind::None, 0, 0, 1, 1, {kObj}};
      s.result = ValueType::TokenSet;
      break;
    case Op::GroupByImages:
      s = {ArgKind::None, 0, 0, 1, 1, {kObj}};
      s.result = ValueType::GroupedObjects;
      break;
    case Op::KeepIfValuesCount:
      s = {ArgKind::Int, 0, 1, 1, 1, {kGrouped}};
      s.wanted_operands = 1;
      s.result = ValueType::GroupedObjects;
      break;
    case Op::Compare:
      s = {ArgKind::Int, 0, 2, 0, 2, {kInt, kInt}};
      s.max_operands = 2;
      s.wanted_operands = 2;
      s.result = ValueType::Boolean;
      break;
  }
  return s;
}

// Number of Int/Bool operands the runtime will default for this step.
std::size_t missing_operands(const ClfStep& step, const Signature& sig) {
  if (sig.wanted_operands == 0) return 0;
  std::size_t have = step.deps.size();
  if (sig.arg_kind == ArgKind::Int) have += step.args.size();
  return have >= sig.wanted_operands ? 0 : sig.wanted_operands - have;
}

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  // Returns false when a structural error made the block unusable for typing.
  bool structure(const std::vector<ClfStep>& steps, std::vector<std::size_t>& path) {
    if (steps.empty()) {
      error(FindingKind::Structure, path, "empty step list", ErrorCode::EmptyProgram);
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      path.push_back(i);
      ok = step_structure(steps[i], i, path) && ok;
      path.pop_back();
    }
    return ok;
  }

  // Types each step of a block; `bound` is true inside map sub-blocks.
  std::vector<ValueType> types(const std::vector<ClfStep>& steps,
                               std::vector<std::size_t>& path) {
    std::vector<ValueType> out;
    out.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const ClfStep& step = steps[i];
      const Signature sig = signature(step.op, step.qualifier);
      path.push_back(i);
      for (std::size_t d = 0; d < step.deps.size(); ++d) {
        const ValueType got = out[step.deps[d]];
        const TypeSet& allowed = sig.dep_types[std::min(d, sig.dep_types.size() - 1)];
        if (std::find(allowed.begin(), allowed.end(), got) == allowed.end()) {
          error(FindingKind::TypeError, path,
                std::string(to_string(step.op)) + " cannot take " +
                    std::string(to_string(got)) + " as input " + std::to_string(d));
        }
      }
      if (const std::size_t missing = missing_operands(step, sig); missing > 0) {
        const char* def = sig.dep_types[0] == kBool ? "false" : "0";
        warning(path, std::to_string(missing) + " missing argument(s), defaults to " + def);
      }
      if (step.op == Op::Map) {
        const auto sub_types = types(step.sub, path);
        if (!sub_types.empty() && sub_types.back() != ValueType::Boolean) {
          error(FindingKind::TypeError, path, "map block must end in a Boolean");
        }
      }
      out.push_back(sig.result);
      path.pop_back();
    }
    return out;
  }

 private:
  bool step_structure(const ClfStep& step, std::size_t index, std::vector<std::size_t>& path) {
    const auto legal = legal_qualifiers(step.op);
    if (legal.empty() ? step.qualifier != Qualifier::None
                      : std::find(legal.begin(), legal.end(), step.qualifier) == legal.end()) {
      error(FindingKind::Structure, path,
            "qualifier '" + std::string(to_string(step.qualifier)) + "' not legal for " +
                std::string(to_string(step.op)),
            ErrorCode::BadQualifier);
      return false;
    }
    const Signature sig = signature(step.op, step.qualifier);
    bool ok = true;
    for (const auto& arg : step.args) {
      const bool is_int = std::holds_alternative<std::int64_t>(arg);
      if ((sig.arg_kind == ArgKind::Int) != is_int || sig.arg_kind == ArgKind::None) {
        error(FindingKind::Structure, path,
              std::string(to_string(step.op)) + " takes no " + (is_int ? "integer" : "token") +
                  " arguments",
              ErrorCode::ArityError);
        ok = false;
      } else if (is_int) {
        const auto v = std::get<std::int64_t>(arg);
        if (v < kMinIntLiteral || v > kMaxIntLiteral) {
          error(FindingKind::Structure, path, "integer literal " + std::to_string(v) + " outside 0..20",
                ErrorCode::LiteralOutOfRange);
          ok = false;
        }
      } else if (std::get<std::string>(arg).empty()) {
        error(FindingKind::Structure, path, "empty token", ErrorCode::ArityError);
        ok = false;
      }
    }
    if (step.args.size() < sig.min_args || step.args.size() > sig.max_args) {
      error(FindingKind::Structure, path,
            std::string(to_string(step.op)) + " expects " + std::to_string(sig.min_args) + ".." +
                std::to_string(sig.max_args) + " literal arguments",
            ErrorCode::ArityError);
      ok = false;
    }
    if (step.deps.size() < sig.min_deps || step.deps.size() > sig.max_deps ||
        (sig.max_operands != 0 && step.deps.size() + step.args.size() > sig.max_operands)) {
      error(FindingKind::Structure, path,
            std::string(to_string(step.op)) + " has the wrong number of inputs",
            ErrorCode::ArityError);
      ok = false;
    }
    for (std::size_t d : step.deps) {
      if (d >= index) {
        error(FindingKind::Structure, path,
              "depends on step " + std::to_string(d) + " which is not earlier",
              ErrorCode::ForwardDependency);
        ok = false;
      }
    }
    if (sig.needs_sub) {
      ok = structure(step.sub, path) && ok;
    } else if (!step.sub.empty()) {
      error(FindingKind::Structure, path, "only map takes a sub block", ErrorCode::ArityError);
      ok = false;
    }
    return ok;
  }

  void error(FindingKind kind, const std::vector<std::size_t>& path, std::string message,
             std::optional<ErrorCode> code = std::nullopt) {
    report_.findings.push_back({Severity::Error, kind, path, std::move(message), code});
  }

  void warning(const std::vector<std::size_t>& path, std::string message) {
    report_.findings.push_back(
        {Severity::Warning, FindingKind::MissingArgument, path, std::move(message), std::nullopt});
  }

  ValidationReport& report_;
};

std::string format_path(const std::vector<std::size_t>& path) {
  std::string out = "step";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out += (i == 0 ? " " : ".sub[");
    out += std::to_string(path[i]);
    if (i > 0) out += "]";
  }
  return out;
}

ClfStep step_from_raw(const detail::RawStep& raw) {
  ClfStep step;
  const auto op = op_from_string(raw.op);
  if (!op) throw Error(ErrorCode::UnknownOperation, "'" + raw.op + "'");
  step.op = *op;
  if (raw.qualifier) {
    const auto q = qualifier_from_string(*raw.qualifier);
    if (!q || *q == Qualifier::None) {
      throw Error(ErrorCode::BadQualifier, "'" + *raw.qualifier + "' on " + raw.op);
    }
    step.qualifier = *q;
  }
  step.args = raw.args;
  step.deps = raw.deps;
  if (raw.sub) {
    if (raw.sub->empty()) throw Error(ErrorCode::EmptyProgram, "empty sub block in " + raw.op);
    for (const auto& s : *raw.sub) step.sub.push_back(step_from_raw(s));
  }
  return step;
}

nlohmann::ordered_json steps_to_json(const std::vector<ClfStep>& steps) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& step : steps) {
    nlohmann::ordered_json j;
    j["op"] = to_string(step.op);
    if (step.qualifier != Qualifier::None) j["qualifier"] = to_string(step.qualifier);
    j["args"] = detail::literals_to_json(step.args);
    j["deps"] = step.deps;
    if (!step.sub.empty()) j["sub"] = steps_to_json(step.sub);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

std::string_view to_string(Op op) {
  for (const auto& [o, name] : kOpNames) {
    if (o == op) return name;
  }
  return "?";
}

std::string_view to_string(Qualifier q) {
  for (const auto& [v, name] : kQualifierNames) {
    if (v == q) return name;
  }
  return "?";
}

std::optional<Op> op_from_string(std::string_view name) {
  for (const auto& [o, n] : kOpNames) {
    if (n == name) return o;
  }
  return std::nullopt;
}

std::optional<Qualifier> qualifier_from_string(std::string_view name) {
  for (const auto& [q, n] : kQualifierNames) {
    if (n == name) return q;
  }
  return std::nullopt;
}

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::ObjectSet: return "ObjectSet";
    case ValueType::GroupedObjects: return "GroupedObjects";
    case ValueType::Integer: return "Integer";
    case ValueType::Boolean: return "Boolean";
    case ValueType::String: return "String";
    case ValueType::TokenSet: return "TokenSet";
  }
  return "?";
}

ValueType result_type(const ClfStep& step) { return signature(step.op, step.qualifier).result; }

namespace detail {

namespace {

Literal literal_from_json(const nlohmann::ordered_json& v) {
  if (v.is_string()) return normalize_token(v.get<std::string>());
  if (v.is_number_integer()) return v.get<std::int64_t>();
  throw Error(ErrorCode::ArityError, "argument must be a token or an integer: " + v.dump());
}

RawStep raw_step_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedFile, "step must be an object");
  RawStep raw;
  for (const auto& [key, value] : j.items()) {
    if (key == "op") {
      if (!value.is_string()) throw Error(ErrorCode::MalformedFile, "op must be a string");
      raw.op = normalize_token(value.get<std::string>());
    } else if (key == "qualifier") {
      if (value.is_null()) continue;
      if (!value.is_string()) throw Error(ErrorCode::BadQualifier, value.dump());
      raw.qualifier = normalize_token(value.get<std::string>());
    } else if (key == "args") {
      if (!value.is_array()) throw Error(ErrorCode::ArityError, "args must be a list");
      for (const auto& a : value) raw.args.push_back(literal_from_json(a));
    } else if (key == "deps") {
      if (!value.is_array()) throw Error(ErrorCode::ArityError, "deps must be a list");
      for (const auto& d : value) {
        if (!d.is_number_integer() || d.get<std::int64_t>() < 0) {
          throw Error(ErrorCode::MalformedFile, "bad dependency " + d.dump());
        }
        raw.deps.push_back(d.get<std::size_t>());
      }
    } else if (key == "sub") {
      raw.sub = raw_steps_from_json(value);
    } else {
      throw Error(ErrorCode::MalformedFile, "unknown step field '" + key + "'");
    }
  }
  if (raw.op.empty()) throw Error(ErrorCode::MalformedFile, "step without op");
  return raw;
}

}  // namespace

std::vector<RawStep> raw_steps_from_json(const nlohmann::ordered_json& steps) {
  if (!steps.is_array()) throw Error(ErrorCode::MalformedFile, "program must be a list of steps");
  std::vector<RawStep> out;
  out.reserve(steps.size());
  for (const auto& j : steps) out.push_back(raw_step_from_json(j));
  return out;
}

nlohmann::ordered_json literals_to_json(const std::vector<Literal>& args) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& a : args) {
    std::visit([&](const auto& v) { out.push_back(v); }, a);
  }
  return out;
}

}  // namespace detail

void check_structure(const ClfProgram& program) {
  ValidationReport report;
  std::vector<std::size_t> path;
  Checker(report).structure(program.steps, path);
  for (const auto& f : report.findings) {
    if (f.kind == FindingKind::Structure) {
      throw Error(f.code.value_or(ErrorCode::ArityError), format_path(f.path) + ": " + f.message);
    }
  }
}

ClfProgram program_from_json(const nlohmann::ordered_json& steps) {
  ClfProgram program;
  for (const auto& raw : detail::raw_steps_from_json(steps)) {
    program.steps.push_back(step_from_raw(raw));
  }
  check_structure(program);
  return program;
}

ClfProgram parse_program(std::string_view text) {
  return program_from_json(parse_json(text, "program"));
}

nlohmann::ordered_json program_to_json(const ClfProgram& program) {
  return steps_to_json(program.steps);
}

std::string serialize_program(const ClfProgram& program) {
  return program_to_json(program).dump();
}

bool exact_match(const ClfProgram& a, const ClfProgram& b) {
  return serialize_program(a) == serialize_program(b);
}

bool ValidationReport::executable() const {
  return std::none_of(findings.begin(), findings.end(),
                      [](const Finding& f) { return f.severity == Severity::Error; });
}

std::size_t ValidationReport::count(FindingKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [&](const Finding& f) { return f.kind == kind; }));
}

ValidationReport validate(const ClfProgram& program) {
  ValidationReport report;
  Checker checker(report);
  std::vector<std::size_t> path;
  if (!checker.structure(program.steps, path)) return report;
  const auto types = checker.types(program.steps, path);
  const ValueType final_type = types.back();
  if (final_type != ValueType::String && final_type != ValueType::Integer &&
      final_type != ValueType::Boolean) {
    report.findings.push_back({Severity::Error, FindingKind::BadFinalType,
                               {program.steps.size() - 1},
                               "final step yields " + std::string(to_string(final_type)) +
                                   ", not an answer",
                               std::nullopt});
  }
  return report;
}

}  // namespace nsvqa
