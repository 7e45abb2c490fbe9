#pragma once

#include <filesystem>
#include <string>

#include "mlfix/artifact/codec.hpp"
#include "scenarios.hpp"
#include "temp_dir.hpp"

namespace mlfix::testing {

struct ScenarioFiles {
    std::filesystem::path schema;
    std::filesystem::path train;
    std::filesystem::path test;
};

inline ScenarioFiles write_scenario(const std::filesystem::path& dir, const SplitRows& s) {
    ScenarioFiles f{dir / "schema.json", dir / "train.csv", dir / "test.csv"};
    write_text(f.schema, artifact::encode_schema(s.schema));
    write_text(f.train, to_csv(s.header, s.train));
    write_text(f.test, to_csv(s.header, s.test));
    return f;
}

/// Predictions echoing the label column, with `wrong_every` rows flipped to
/// `fallback`.
inline std::filesystem::path write_predictions(const std::filesystem::path& path, const SplitRows& s, bool test,
                                               std::size_t wrong_every, const std::string& fallback) {
    const auto& rows = test ? s.test : s.train;
    const auto label = s.schema.label_index().value();
    artifact::PredictionSet p;
    p.dataset_ref = test ? artifact::DatasetRef::test : artifact::DatasetRef::train;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        p.predicted_labels.push_back(wrong_every && i % wrong_every == 0 ? fallback : rows[i][label]);
    }
    write_text(path, artifact::canonical_dump(artifact::to_json(p)));
    return path;
}

}  // namespace mlfix::testing
