#include "check_support.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks::detail {

using artifact::Column;
using artifact::kNullCode;
using artifact::TableFrame;

CheckResult make_result(std::string_view check_id) {
    CheckResult r;
    r.check_id = std::string(check_id);
    r.category = find_definition(check_id).category;
    r.status = CheckStatus::pass;
    return r;
}

std::string fmt(double value) { return artifact::format_double(value); }

std::string condition_text(std::string_view metric, Direction direction, double threshold) {
    std::string out(metric);
    if (direction == Direction::at_most && threshold == 0.0) return out + " == 0";
    out += direction == Direction::at_most ? " ≤ " : " ≥ ";
    return out + fmt(threshold);
}

void apply_condition(CheckResult& result, std::string_view metric, Direction direction, double threshold,
                     CheckStatus on_violation) {
    result.condition = condition_text(metric, direction, threshold);
    const double value = result.metrics.at(std::string(metric));
    const bool violated = direction == Direction::at_most ? value > threshold : value < threshold;
    result.status = violated ? on_violation : CheckStatus::pass;
}

const TableFrame& require_test(const CheckContext& ctx) {
    if (ctx.test == nullptr) throw SkipCheck("requires a test split");
    return *ctx.test;
}

const Column& require_label(const TableFrame& frame) {
    const auto* label = frame.label();
    if (label == nullptr) throw SkipCheck("requires a label column");
    return *label;
}

void require_classification(const TableFrame& frame) {
    require_label(frame);
    if (frame.schema.task != artifact::TaskType::classification) {
        throw SkipCheck("applies to classification tasks only");
    }
}

namespace {

void append_cell(std::string& key, const Column& col, std::size_t row) {
    if (col.is_null(row)) {
        key.push_back('\0');
        return;
    }
    if (col.is_numeric()) {
        double v = col.numbers[row];
        if (v == 0.0) v = 0.0;  // fold -0.0
        char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        key.push_back('N');
        key.append(bytes, sizeof(double));
        return;
    }
    const auto& s = col.text(row);
    const auto len = static_cast<std::uint32_t>(s.size());
    char bytes[sizeof(len)];
    std::memcpy(bytes, &len, sizeof(len));
    key.push_back('S');
    key.append(bytes, sizeof(len));
    key.append(s);
}

}  // namespace

std::vector<std::string> row_keys(const TableFrame& frame, const std::vector<std::size_t>& columns) {
    std::vector<std::string> keys(frame.row_count);
    for (std::size_t r = 0; r < frame.row_count; ++r) {
        auto& key = keys[r];
        key.reserve(columns.size() * 10);
        for (auto c : columns) append_cell(key, frame.columns[c], r);
    }
    return keys;
}

std::vector<std::size_t> content_columns(const artifact::DatasetSchema& schema) {
    std::vector<std::size_t> out;
    const auto index = schema.index_index();
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
        if (schema.columns[i].kind == artifact::ColumnKind::identifier) continue;
        if (index && *index == i) continue;
        out.push_back(i);
    }
    return out;
}

SharedCodes share_codes(const Column& a, const Column& b) {
    std::unordered_map<std::string, std::int32_t> shared;
    auto recode = [&](const Column& col) {
        std::vector<std::int32_t> map(col.dictionary.size());
        for (std::size_t c = 0; c < col.dictionary.size(); ++c) {
            map[c] = shared.try_emplace(col.dictionary[c], static_cast<std::int32_t>(shared.size())).first->second;
        }
        std::vector<std::int32_t> out(col.codes.size());
        for (std::size_t r = 0; r < col.codes.size(); ++r) {
            out[r] = col.codes[r] == kNullCode ? kNullCode : map[col.codes[r]];
        }
        return out;
    };
    SharedCodes codes;
    codes.a = recode(a);
    codes.b = recode(b);
    return codes;
}

SharedCodes share_codes(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::unordered_map<std::string, std::int32_t> shared;
    auto recode = [&](const std::vector<std::string>& values) {
        std::vector<std::int32_t> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            out[i] = shared.try_emplace(values[i], static_cast<std::int32_t>(shared.size())).first->second;
        }
        return out;
    };
    SharedCodes codes;
    codes.a = recode(a);
    codes.b = recode(b);
    return codes;
}

double origin_association(const SharedCodes& codes) {
    std::vector<std::int32_t> origin(codes.a.size(), 0);
    origin.resize(codes.a.size() + codes.b.size(), 1);
    std::vector<std::int32_t> values = codes.a;
    values.insert(values.end(), codes.b.begin(), codes.b.end());
    return cramers_v(origin, values).value_or(0.0);
}

std::vector<std::optional<std::string>> label_strings(const TableFrame& frame) {
    const auto& label = require_label(frame);
    std::vector<std::optional<std::string>> out(frame.row_count);
    for (std::size_t r = 0; r < frame.row_count; ++r) {
        if (label.is_null(r)) continue;
        out[r] = label.is_numeric() ? fmt(label.numbers[r]) : label.text(r);
    }
    return out;
}

}  // namespace mlfix::checks::detail
