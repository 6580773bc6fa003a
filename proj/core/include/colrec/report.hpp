#pragma once

#include "colrec/scenario.hpp"

#include <iosfwd>
#include <string>

namespace colrec {

enum class ReportFormat { json, csv };

/// Throws std::invalid_argument for anything but "json" or "csv".
ReportFormat parse_report_format(const std::string& name);

/// Canonical JSON: keys sorted, two-space indent, reals printed with 12
/// significant digits, non-finite reals as null, trailing newline.
std::string to_json(const RunReport& report);
std::string to_json(const SweepReport& report);

/// One row per user: user,class,truthful_item,truthful_welfare,collective_item,collective_welfare.
/// Top-k item sets are joined with ';'. Collective cells are empty without a collective run.
std::string to_csv(const RunReport& report);
/// One row per alpha.
std::string to_csv(const SweepReport& report);

/// Re-emits an arbitrary JSON document in the canonical form above.
std::string canonical_json(const std::string& json_text);

/// key,value rows for every scalar leaf of a JSON document; nested keys are
/// joined with '.', array positions appear as indices.
std::string flat_csv(const std::string& json_text);

/// 12 significant digits; "-0" is normalised to "0".
std::string format_real(double v);

}  // namespace colrec
