#pragma once

#include <cstddef>
#include <cstdint>

#include "mlfix/artifact/table.hpp"
#include "mlfix/artifact/types.hpp"

namespace mlfix::checks {

struct StatisticsOptions {
    std::size_t top_k = 10;
    // Categories rarer than this never leave the client (aggregate-only bundles).
    std::int64_t min_category_count = 5;
};

/// Per-column summaries plus the label's class distribution. Numeric columns
/// get min/max/mean/sample std/quartiles; categorical columns get their most
/// frequent categories; text, datetime and identifier columns only counts.
artifact::DatasetStatistics compute_dataset_statistics(const artifact::TableFrame& table,
                                                       const StatisticsOptions& options = {});

}  // namespace mlfix::checks
