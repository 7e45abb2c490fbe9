#pragma once

// Typed columnar dataset and its schema. Numeric cells use NaN as the null
// marker; every other kind stores dictionary codes with kNullCode for null.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mlfix/artifact/types.hpp"

namespace mlfix::artifact {

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    bool operator==(const ColumnSpec&) const = default;
};

struct DatasetSchema {
    std::vector<ColumnSpec> columns;
    std::optional<std::string> label_column;
    std::optional<std::string> index_column;
    TaskType task = TaskType::classification;

    /// Throws SchemaError when names are empty or duplicated, when the label or
    /// index column is undeclared, or when a classification label is not
    /// categorical.
    void validate() const;

    std::optional<std::size_t> find(std::string_view name) const;

    /// Features are every column except the label, the index and identifiers.
    bool is_feature(std::size_t column) const;
    std::vector<std::size_t> feature_columns() const;
    std::optional<std::size_t> label_index() const;
    std::optional<std::size_t> index_index() const;

    bool operator==(const DatasetSchema&) const = default;
};

inline constexpr std::int32_t kNullCode = -1;

/// Returns true for the tokens read as null: "", "null", "nan", "none", "n/a"
/// (case-insensitive, surrounding whitespace ignored).
bool is_null_token(std::string_view raw);

struct Column {
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> numbers;       // numeric kind; NaN == null
    std::vector<std::int32_t> codes;   // other kinds; kNullCode == null
    std::vector<std::string> dictionary;

    // Ingest observations kept for checks that inspect raw cell forms.
    std::map<std::string, std::int64_t> null_tokens;  // raw token -> count
    std::int64_t unparsed_numeric = 0;                // numeric cells that failed to parse

    bool is_numeric() const { return kind == ColumnKind::numeric; }
    std::size_t size() const { return is_numeric() ? numbers.size() : codes.size(); }
    bool is_null(std::size_t row) const {
        return is_numeric() ? std::isnan(numbers[row]) : codes[row] == kNullCode;
    }
    /// Dictionary string of a non-numeric cell; undefined for nulls.
    const std::string& text(std::size_t row) const { return dictionary[codes[row]]; }
    std::size_t null_count() const;
};

struct TableFrame {
    DatasetSchema schema;
    std::size_t row_count = 0;
    std::vector<Column> columns;  // parallel to schema.columns

    /// Throws SchemaError when a column length or kind disagrees with the schema.
    void validate() const;

    const Column& column(std::string_view name) const;
    const Column* label() const;
};

/// Accumulates rows of raw string cells into a TableFrame, applying the null
/// token list and numeric parsing rules shared by the CSV reader and tests.
class TableBuilder {
public:
    explicit TableBuilder(DatasetSchema schema);

    /// `cells` is ordered like schema.columns.
    void append_row(const std::vector<std::string_view>& cells);
    void reserve(std::size_t rows);

    std::size_t rows() const { return rows_; }
    TableFrame finish() &&;

private:
    DatasetSchema schema_;
    std::vector<Column> columns_;
    std::vector<std::unordered_map<std::string, std::int32_t>> interned_;
    std::size_t rows_ = 0;
};

/// Parses a finite decimal number; leading/trailing whitespace allowed.
std::optional<double> parse_number(std::string_view text);

}  // namespace mlfix::artifact
