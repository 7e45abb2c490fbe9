#pragma once

// Fixed registry of check identifiers. Both the check engine and the bundle
// decoder consult this list: a check_id outside it is a wire error.

#include <optional>
#include <span>
#include <string_view>

#include "mlfix/artifact/types.hpp"

namespace mlfix::artifact {

struct CatalogEntry {
    std::string_view id;
    CheckCategory category;
    std::string_view display_name;
};

/// All known checks, in registry (execution and report) order.
std::span<const CatalogEntry> check_catalog();

std::optional<CatalogEntry> find_check(std::string_view id);

/// Human-readable metric label, e.g. "cramers_v" -> "Cramer's V". Unknown
/// names come back unchanged.
std::string_view metric_display_name(std::string_view metric);

}  // namespace mlfix::artifact
