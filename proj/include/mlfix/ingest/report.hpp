#pragma once

// Human-readable rendering of a Diagnosis as a two-column Finding/Action
// table: finding title and evidence on the left, action and rationale on the
// right.

#include <optional>
#include <string>
#include <string_view>

#include "mlfix/artifact/types.hpp"

namespace mlfix::ingest {

enum class ReportFormat { markdown, plain };

std::optional<ReportFormat> parse_report_format(std::string_view name);

/// "checks.label_drift" -> "Label drift"; "reasoner.invalid_split" -> "Invalid split".
std::string finding_title(std::string_view finding_id);

std::string render_report(const artifact::Diagnosis& diagnosis, ReportFormat format);

}  // namespace mlfix::ingest
