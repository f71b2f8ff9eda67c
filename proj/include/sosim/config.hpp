#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sosim/core.hpp"
#include "sosim/scenario.hpp"

namespace sosim {

/// A scenario file after parsing. The schema is documented in
/// docs/scenario-format.md.
struct ScenarioConfig {
  ScenarioSpec spec;
  std::optional<std::uint64_t> seed;
  std::string hash;  // FNV-1a of the raw file bytes
};

/// Throws ParseError for malformed JSON and SchemaError for a wrong shape.
/// Resource names resolve against `net`; ids are checked later, by `run`.
/// Generators without a seed get derive_seed(seed, k), where seed is the
/// file's own unless `run_seed_wins`.
ScenarioConfig parse_scenario(std::string_view text, const Network& net,
                              std::uint64_t run_seed, bool run_seed_wins = false);
ScenarioConfig load_scenario(const std::string& path, const Network& net,
                             std::uint64_t run_seed, bool run_seed_wins = false);

}  // namespace sosim
