#include "mlfix/ingest/csv_reader.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace mlfix::ingest {

CsvError::CsvError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? source + ": " + message : source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

namespace {

// Splits one record starting at `pos`. Unquoted fields are views into the
// input; quoted ones are unescaped into `scratch`. Advances `pos` past the
// record terminator and `line` past any newlines consumed.
class RecordReader {
public:
    RecordReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {
        if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    }

    bool done() const { return pos_ >= text_.size(); }
    std::size_t line() const { return record_line_; }

    const std::vector<std::string_view>& next() {
        fields_.clear();
        scratch_.clear();
        quoted_.clear();
        record_line_ = line_;
        while (true) {
            if (pos_ < text_.size() && text_[pos_] == '"') {
                read_quoted();
            } else {
                const auto start = pos_;
                while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '\n' && text_[pos_] != '\r') {
                    if (text_[pos_] == '"') throw CsvError(source_, line_, "quote inside an unquoted field");
                    ++pos_;
                }
                fields_.push_back(text_.substr(start, pos_ - start));
            }
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];
            if (c == ',') {
                ++pos_;
                if (pos_ >= text_.size()) fields_.emplace_back();
                continue;
            }
            if (c == '\r') ++pos_;
            if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
            ++line_;
            break;
        }
        // Quoted fields live in scratch_, which may have reallocated while
        // reading; patch their views now.
        for (const auto& [index, range] : quoted_) {
            fields_[index] = std::string_view(scratch_).substr(range.first, range.second);
        }
        return fields_;
    }

private:
    void read_quoted() {
        const auto opened = line_;
        ++pos_;
        const auto start = scratch_.size();
        while (true) {
            if (pos_ >= text_.size()) throw CsvError(source_, opened, "unterminated quoted field");
            const char c = text_[pos_++];
            if (c == '"') {
                if (pos_ < text_.size() && text_[pos_] == '"') {
                    scratch_.push_back('"');
                    ++pos_;
                    continue;
                }
                break;
            }
            if (c == '\n') ++line_;
            scratch_.push_back(c);
        }
        if (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '\n' && text_[pos_] != '\r') {
            throw CsvError(source_, line_, "unexpected character after closing quote");
        }
        quoted_.push_back({fields_.size(), {start, scratch_.size() - start}});
        fields_.emplace_back();
    }

    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t record_line_ = 1;
    std::vector<std::string_view> fields_;
    std::string scratch_;
    std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> quoted_;
};

}  // namespace

artifact::TableFrame parse_csv(std::string_view text, const artifact::DatasetSchema& schema, std::string_view source) {
    const std::string name(source);
    try {
        schema.validate();
    } catch (const artifact::SchemaError& e) {
        throw CsvError(name, 0, std::string("invalid schema: ") + e.what());
    }
    RecordReader reader(text, name);
    if (reader.done()) throw CsvError(name, 1, "missing header row");

    const auto& header = reader.next();
    std::unordered_map<std::string, std::size_t> position;  // schema column -> csv field
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string col(header[i]);
        if (!schema.find(col)) throw CsvError(name, 1, "column '" + col + "' is not declared in the schema");
        if (!position.emplace(col, i).second) throw CsvError(name, 1, "duplicate column '" + col + "'");
    }
    std::vector<std::size_t> order;  // schema index -> csv field
    for (const auto& spec : schema.columns) {
        const auto it = position.find(spec.name);
        if (it == position.end()) throw CsvError(name, 1, "missing column '" + spec.name + "'");
        order.push_back(it->second);
    }

    artifact::TableBuilder builder(schema);
    std::vector<std::string_view> cells(order.size());
    while (!reader.done()) {
        const auto& fields = reader.next();
        // A lone trailing empty line is not a record.
        if (reader.done() && fields.size() == 1 && fields[0].empty() && order.size() > 1) break;
        if (fields.size() != order.size()) {
            throw CsvError(name, reader.line(),
                           "expected " + std::to_string(order.size()) + " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < order.size(); ++c) cells[c] = fields[order[c]];
        builder.append_row(cells);
    }
    return std::move(builder).finish();
}

artifact::TableFrame read_csv(const std::filesystem::path& path, const artifact::DatasetSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(path.string(), 0, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto text = buffer.str();
    return parse_csv(text, schema, path.string());
}

}  // namespace mlfix::ingest
