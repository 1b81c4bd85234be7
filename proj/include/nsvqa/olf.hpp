#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsvqa/clf.hpp"

namespace nsvqa {

/// A step of the original (pre-refactoring) logical forms. Same JSON shape
/// as CLF steps, without qualifiers: the qualifier is fused into the name.
struct OlfStep {
  std::string op;
  std::vector<Literal> args;
  std::vector<std::size_t> deps;
  std::vector<OlfStep> sub;

  bool operator==(const OlfStep&) const = default;
};

struct OlfProgram {
  std::vector<OlfStep> steps;

  bool operator==(const OlfProgram&) const = default;
};

/// The original operation names accepted by translate_olf_to_clf.
std::span<const std::string_view> olf_operations();

OlfProgram parse_olf_program(std::string_view text);
OlfProgram olf_program_from_json(const nlohmann::ordered_json& steps);
nlohmann::ordered_json olf_program_to_json(const OlfProgram& program);

/// Rewrites each original step into its compositional form:
///   some/all -> map(or/and), none -> logic_not(map(or)),
///   choose_*/relation_between_nouns -> choose(q), query_* -> query(q),
///   verify_attr -> verify(attr), with_relation[_object] -> filter(rel),
///   filter -> filter(attr), keep_if_values_count_X -> keep_if_values_count(X),
///   eq/geq/leq/lt/gt -> compare(X); unique/assert_unique are dropped and
///   their consumers read the dropped step's input directly.
/// Throws UnknownOlfOperation, or MalformedOlf for a unique step without
/// exactly one input.
ClfProgram translate_olf_to_clf(const OlfProgram& program);

}  // namespace nsvqa
