#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "nsvqa/clf.hpp"
#include "nsvqa/executor.hpp"

namespace nsvqa::testing {

// mention -> node names, in resolution order.
using AliasTable = std::map<std::string, std::vector<std::string>>;

struct OracleEvent {
  EventKind kind;
  std::size_t step;
  bool operator==(const OracleEvent&) const = default;
};

struct OracleOutcome {
  std::optional<std::string> answer;
  std::vector<OracleEvent> events;
  bool fatal = false;
};

// Independent reference evaluator. Object sets are 64-bit masks over the
// concatenated objects of all images (at most 64 objects in total).
OracleOutcome oracle_execute(const ClfProgram& program, const std::vector<SynImage>& images,
                             const AliasTable* aliases = nullptr);

// Category table the oracle knows about; random worlds only draw from it.
const std::map<std::string, std::string>& oracle_attribute_categories();

}  // namespace nsvqa::testing
