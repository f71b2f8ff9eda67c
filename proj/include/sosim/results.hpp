#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sosim/scenario.hpp"

namespace sosim {

enum class ResultFormat { Csv, JsonLines };

/// One row per timestep. A `#` header block carries seed, config hash and
/// RNG name. Unavailable costs are written as NA.
void export_results(const RunResult& result, ResultFormat format, std::ostream& out);
void export_results_file(const RunResult& result, ResultFormat format,
                         const std::string& path);

/// `quantity,cost` rows; truncation is noted in the header.
void export_curve(const SupplyCurve& curve, std::ostream& out);
void export_curve_file(const SupplyCurve& curve, const std::string& path);

/// scenario,total_cost,total_shortfall,satisfied_fraction rows.
void export_suite_costs(const std::vector<SuiteEntry>& suite, double reference_price,
                        std::ostream& out);

}  // namespace sosim
