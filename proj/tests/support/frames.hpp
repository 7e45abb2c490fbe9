#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "mlfix/artifact/table.hpp"

namespace mlfix::testing {

/// Builds a frame from string cells; kinds come from `schema`.
inline artifact::TableFrame make_frame(const artifact::DatasetSchema& schema,
                                       const std::vector<std::vector<std::string>>& rows) {
    artifact::TableBuilder builder(schema);
    for (const auto& row : rows) {
        std::vector<std::string_view> cells(row.begin(), row.end());
        builder.append_row(cells);
    }
    return std::move(builder).finish();
}

inline artifact::DatasetSchema make_schema(std::initializer_list<artifact::ColumnSpec> columns,
                                           std::optional<std::string> label = std::nullopt,
                                           artifact::TaskType task = artifact::TaskType::classification,
                                           std::optional<std::string> index = std::nullopt) {
    artifact::DatasetSchema s;
    s.columns = columns;
    s.label_column = std::move(label);
    s.index_column = std::move(index);
    s.task = task;
    return s;
}

}  // namespace mlfix::testing
