#include "mlfix/artifact/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <set>

namespace mlfix::artifact {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool is_null_token(std::string_view raw) {
    const auto t = trim(raw);
    return t.empty() || iequals(t, "null") || iequals(t, "nan") || iequals(t, "none") ||
           iequals(t, "n/a");
}

std::optional<double> parse_number(std::string_view text) {
    auto t = trim(text);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

void DatasetSchema::validate() const {
    std::set<std::string, std::less<>> seen;
    for (const auto& c : columns) {
        if (c.name.empty()) throw SchemaError("column name must be non-empty");
        if (!seen.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
    }
    if (label_column) {
        auto idx = find(*label_column);
        if (!idx) throw SchemaError("label_column '" + *label_column + "' is not a declared column");
        const auto kind = columns[*idx].kind;
        if (task == TaskType::classification && kind != ColumnKind::categorical) {
            throw SchemaError("classification label '" + *label_column + "' must be categorical");
        }
        if (task == TaskType::regression && kind != ColumnKind::numeric) {
            throw SchemaError("regression label '" + *label_column + "' must be numeric");
        }
    }
    if (index_column && !find(*index_column)) {
        throw SchemaError("index_column '" + *index_column + "' is not a declared column");
    }
}

std::optional<std::size_t> DatasetSchema::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

bool DatasetSchema::is_feature(std::size_t column) const {
    const auto& c = columns[column];
    if (c.kind == ColumnKind::identifier) return false;
    if (label_column && c.name == *label_column) return false;
    if (index_column && c.name == *index_column) return false;
    return true;
}

std::vector<std::size_t> DatasetSchema::feature_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (is_feature(i)) out.push_back(i);
    }
    return out;
}

std::optional<std::size_t> DatasetSchema::label_index() const {
    return label_column ? find(*label_column) : std::nullopt;
}

std::optional<std::size_t> DatasetSchema::index_index() const {
    return index_column ? find(*index_column) : std::nullopt;
}

std::size_t Column::null_count() const {
    std::size_t n = 0;
    if (is_numeric()) {
        for (double v : numbers) n += std::isnan(v) ? 1 : 0;
    } else {
        for (auto c : codes) n += c == kNullCode ? 1 : 0;
    }
    return n;
}

void TableFrame::validate() const {
    schema.validate();
    if (columns.size() != schema.columns.size()) {
        throw SchemaError("table has " + std::to_string(columns.size()) + " columns, schema declares " +
                          std::to_string(schema.columns.size()));
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& col = columns[i];
        const auto& name = schema.columns[i].name;
        if (col.kind != schema.columns[i].kind) throw SchemaError("column '" + name + "' kind mismatch");
        if (col.size() != row_count) throw SchemaError("column '" + name + "' length differs from row_count");
        if (col.is_numeric()) {
            for (double v : col.numbers) {
                if (std::isinf(v)) throw SchemaError("column '" + name + "' holds a non-finite number");
            }
        } else {
            for (auto c : col.codes) {
                if (c != kNullCode && (c < 0 || static_cast<std::size_t>(c) >= col.dictionary.size())) {
                    throw SchemaError("column '" + name + "' holds an invalid dictionary code");
                }
            }
        }
    }
}

const Column& TableFrame::column(std::string_view name) const {
    auto idx = schema.find(name);
    if (!idx) throw SchemaError("unknown column '" + std::string(name) + "'");
    return columns[*idx];
}

const Column* TableFrame::label() const {
    auto idx = schema.label_index();
    return idx ? &columns[*idx] : nullptr;
}

TableBuilder::TableBuilder(DatasetSchema schema) : schema_(std::move(schema)) {
    schema_.validate();
    columns_.resize(schema_.columns.size());
    interned_.resize(schema_.columns.size());
    for (std::size_t i = 0; i < columns_.size(); ++i) columns_[i].kind = schema_.columns[i].kind;
}

void TableBuilder::reserve(std::size_t rows) {
    for (auto& c : columns_) {
        if (c.is_numeric()) c.numbers.reserve(rows);
        else c.codes.reserve(rows);
    }
}

void TableBuilder::append_row(const std::vector<std::string_view>& cells) {
    if (cells.size() != columns_.size()) {
        throw SchemaError("row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& col = columns_[i];
        const auto raw = cells[i];
        if (is_null_token(raw)) {
            ++col.null_tokens[std::string(raw)];
            if (col.is_numeric()) col.numbers.push_back(std::numeric_limits<double>::quiet_NaN());
            else col.codes.push_back(kNullCode);
            continue;
        }
        if (col.is_numeric()) {
            auto v = parse_number(raw);
            if (!v) ++col.unparsed_numeric;
            col.numbers.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
            continue;
        }
        auto& dict = interned_[i];
        auto it = dict.find(std::string(raw));
        if (it == dict.end()) {
            const auto code = static_cast<std::int32_t>(col.dictionary.size());
            col.dictionary.emplace_back(raw);
            it = dict.emplace(std::string(raw), code).first;
        }
        col.codes.push_back(it->second);
    }
    ++rows_;
}

TableFrame TableBuilder::finish() && {
    TableFrame frame;
    frame.schema = std::move(schema_);
    frame.row_count = rows_;
    frame.columns = std::move(columns_);
    return frame;
}

}  // namespace mlfix::artifact
