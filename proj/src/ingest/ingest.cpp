#include "mlfix/ingest/ingest.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mlfix/artifact/codec.hpp"
#include "mlfix/checks/dataset_statistics.hpp"
#include "mlfix/checks/registry.hpp"
#include "mlfix/ingest/csv_reader.hpp"

namespace mlfix::ingest {

namespace fs = std::filesystem;
using artifact::ArtifactBundle;
using artifact::CheckCategory;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto tmp = dir / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(path.string() + ": cannot write file");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw InputError(path.string() + ": write failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError(path.string() + ": cannot replace file");
    }
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        char* end = nullptr;
        const long long v = std::strtoll(epoch, &end, 10);
        if (end != nullptr && *end == '\0' && v >= 0) now = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

template <typename F>
auto decode_sidecar(const fs::path& path, F decode) {
    const auto text = read_file(path);
    try {
        return decode(artifact::parse_json(text));
    } catch (const artifact::DecodeError& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const std::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

artifact::TableFrame load_split(const fs::path& path, const artifact::DatasetSchema& schema) {
    if (!fs::exists(path)) throw InputError(path.string() + ": file not found");
    try {
        return read_csv(path, schema);
    } catch (const CsvError& e) {
        throw InputError(e.what());
    }
}

}  // namespace

ArtifactBundle build_bundle(const IngestConfig& config) {
    if (!fs::exists(config.schema_path)) throw InputError(config.schema_path.string() + ": file not found");
    const auto schema = decode_sidecar(config.schema_path, [](const artifact::Json& j) {
        auto s = artifact::schema_from_json(j);
        s.validate();
        return s;
    });

    const auto train = load_split(config.train_path, schema);
    std::optional<artifact::TableFrame> test;
    if (config.test_path) test = load_split(*config.test_path, schema);

    checks::CheckContext ctx;
    ctx.train = &train;
    ctx.test = test ? &*test : nullptr;
    if (config.config_path) {
        ctx.config = decode_sidecar(*config.config_path, [](const artifact::Json& j) {
            return checks::CheckConfig::from_json(j);
        });
    }

    auto load_predictions = [&](const std::optional<fs::path>& path, artifact::DatasetRef ref,
                                const artifact::TableFrame* frame) -> std::optional<artifact::PredictionSet> {
        if (!path) return std::nullopt;
        if (frame == nullptr) throw InputError(path->string() + ": predictions given for a missing split");
        auto p = decode_sidecar(*path, [](const artifact::Json& j) { return artifact::predictions_from_json(j); });
        if (p.dataset_ref != ref) throw InputError(path->string() + ": dataset_ref does not match the split");
        if (p.size() != frame->row_count) {
            throw InputError(path->string() + ": " + std::to_string(p.size()) + " predictions for " +
                             std::to_string(frame->row_count) + " rows");
        }
        return p;
    };
    const auto train_pred = load_predictions(config.predictions_train_path, artifact::DatasetRef::train, &train);
    const auto test_pred = load_predictions(config.predictions_test_path, artifact::DatasetRef::test, ctx.test);
    ctx.train_predictions = train_pred ? &*train_pred : nullptr;
    ctx.test_predictions = test_pred ? &*test_pred : nullptr;

    ArtifactBundle bundle;
    bundle.created_at = utc_timestamp();
    bundle.train_stats = checks::compute_dataset_statistics(train);
    if (test) bundle.test_stats = checks::compute_dataset_statistics(*test);
    bundle.integrity_results = checks::run_suite(CheckCategory::data_integrity, ctx);
    bundle.validation_results = checks::run_suite(CheckCategory::train_test_validation, ctx);
    bundle.evaluation_results = checks::run_suite(CheckCategory::model_evaluation, ctx);
    if (config.checkpoint_path) {
        bundle.checkpoint = decode_sidecar(*config.checkpoint_path,
                                           [](const artifact::Json& j) { return artifact::checkpoint_from_json(j); });
    }
    bundle.client_info = {{"tool", "mlfix"}, {"version", "1.0.0"}};
    return bundle;
}

ArtifactBundle ingest(const IngestConfig& config) {
    auto bundle = build_bundle(config);
    write_file_atomic(config.output_path, artifact::encode_bundle(bundle));
    return bundle;
}

}  // namespace mlfix::ingest
