#pragma once

// Shared step-list JSON shape for CLF and OLF programs.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsvqa/clf.hpp"

namespace nsvqa::detail {

struct RawStep {
  std::string op;
  std::optional<std::string> qualifier;
  std::vector<Literal> args;
  std::vector<std::size_t> deps;
  std::optional<std::vector<RawStep>> sub;
};

std::vector<RawStep> raw_steps_from_json(const nlohmann::ordered_json& steps);
nlohmann::ordered_json literals_to_json(const std::vector<Literal>& args);

}  // namespace nsvqa::detail
