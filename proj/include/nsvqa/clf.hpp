#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nsvqa/error.hpp"

namespace nsvqa {

/// The 17 compositional operations.
enum class Op {
  Find,
  Scene,
  Filter,
  Choose,
  Query,
  Verify,
  Map,
  LogicNot,
  LogicOr,
  LogicAnd,
  Count,
  Exists,
  Keys,
  UniqueImages,
  GroupByImages,
  KeepIfValuesCount,
  Compare,
};

inline constexpr std::size_t kClfOperationCount = 17;

enum class Qualifier { None, Name, Attr, Rel, Or, And, Eq, Geq, Leq, Lt, Gt };

std::string_view to_string(Op op);
std::string_view to_string(Qualifier q);
std::optional<Op> op_from_string(std::string_view name);
std::optional<Qualifier> qualifier_from_string(std::string_view name);

/// Static and runtime value kinds.
enum class ValueType { ObjectSet, GroupedObjects, Integer, Boolean, String, TokenSet };

std::string_view to_string(ValueType t);

inline constexpr std::int64_t kMinIntLiteral = 0;
inline constexpr std::int64_t kMaxIntLiteral = 20;

/// A literal program argument: a normalized token or a small integer.
using Literal = std::variant<std::string, std::int64_t>;

struct ClfStep {
  Op op = Op::Scene;
  Qualifier qualifier = Qualifier::None;
  std::vector<Literal> args;
  std::vector<std::size_t> deps;
  std::vector<ClfStep> sub;  // only for map; indices inside are local to the block

  bool operator==(const ClfStep&) const = default;
};

struct ClfProgram {
  std::vector<ClfStep> steps;

  bool operator==(const ClfProgram&) const = default;
};

/// Parses the step-list JSON text. Throws Error with UnknownOperation,
/// BadQualifier, ArityError, ForwardDependency, EmptyProgram,
/// LiteralOutOfRange or MalformedFile.
ClfProgram parse_program(std::string_view text);
ClfProgram program_from_json(const nlohmann::ordered_json& steps);

/// Same structural checks as parse_program for programs built in code.
void check_structure(const ClfProgram& program);

/// Canonical form: compact JSON, fixed key order (op, qualifier, args, deps,
/// sub), qualifier and sub omitted when absent.
std::string serialize_program(const ClfProgram& program);
nlohmann::ordered_json program_to_json(const ClfProgram& program);

bool exact_match(const ClfProgram& a, const ClfProgram& b);

enum class FindingKind { Structure, TypeError, MissingArgument, BadFinalType };
enum class Severity { Error, Warning };

struct Finding {
  Severity severity;
  FindingKind kind;
  std::vector<std::size_t> path;  // step index, then sub-step indices
  std::string message;
  std::optional<ErrorCode> code;  // set for Structure findings
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool executable() const;
  std::size_t count(FindingKind kind) const;
};

/// Static checks: structure, the type table, the answer type of the last
/// step, and argument sites the runtime checker will default.
ValidationReport validate(const ClfProgram& program);

/// Result type of a step given its inputs are well typed.
ValueType result_type(const ClfStep& step);

}  // namespace nsvqa
