// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "vtprompt/scoring.hpp"

namespace vtp {

/// Markdown report with one table per benchmark family; when a baseline
/// is given every value carries its delta, "85.17(+8.17)" style.
std::string render_markdown_report(const MetricsReport& report,
                                   const std::optional<MetricsReport>& baseline = std::nullopt);

/// Flat key,value[,baseline,delta] CSV.
std::string render_csv_report(const MetricsReport& report,
                              const std::optional<MetricsReport>& baseline = std::nullopt);

} // namespace vtp
