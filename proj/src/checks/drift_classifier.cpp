#include "mlfix/checks/drift_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks {
namespace {

using artifact::ColumnKind;
using artifact::kNullCode;
using artifact::TableFrame;

struct Feature {
    std::string name;
    bool numeric = true;
    std::vector<double> values;        // numeric; NaN == null
    std::vector<std::int32_t> codes;   // categorical, codes shared by both splits
};

struct Split {
    int feature = -1;
    double threshold = 0.0;            // numeric: value <= threshold goes left
    std::vector<std::int32_t> left;    // categorical: sorted codes going left
    double gain = 0.0;
};

struct Node {
    Split split;
    int left = -1;
    int right = -1;
    double positive_rate = 0.5;
};

double gini(double c0, double c1) {
    const double n = c0 + c1;
    if (n == 0.0) return 0.0;
    const double p = c1 / n;
    return 2.0 * p * (1.0 - p);
}

// Fisher-Yates with an explicit bounded draw so results do not depend on the
// standard library's distribution implementations.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<Feature>& features, const std::vector<std::uint8_t>& origin,
                const DriftClassifierOptions& options)
        : features_(features), origin_(origin), options_(options), importance_(features.size(), 0.0) {}

    void fit(std::vector<std::size_t> rows) { build(std::move(rows), 0); }

    double predict(std::size_t row) const {
        int at = 0;
        while (nodes_[at].left >= 0) {
            at = goes_left(nodes_[at].split, row) ? nodes_[at].left : nodes_[at].right;
        }
        return nodes_[at].positive_rate;
    }

    const std::vector<double>& importance() const { return importance_; }

private:
    bool goes_left(const Split& s, std::size_t row) const {
        const auto& f = features_[s.feature];
        if (f.numeric) {
            const double v = f.values[row];
            return !std::isnan(v) && v <= s.threshold;
        }
        return std::binary_search(s.left.begin(), s.left.end(), f.codes[row]);
    }

    int build(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double c1 = 0.0;
        for (auto r : rows) c1 += origin_[r];
        const double n = static_cast<double>(rows.size());
        const double c0 = n - c1;
        nodes_[id].positive_rate = n > 0 ? c1 / n : 0.5;
        if (depth >= options_.max_depth || c0 == 0.0 || c1 == 0.0 ||
            rows.size() < 2 * options_.min_samples_leaf) {
            return id;
        }
        const double parent = gini(c0, c1) * n;
        Split best;
        for (std::size_t f = 0; f < features_.size(); ++f) {
            Split s = features_[f].numeric ? best_numeric(f, rows, parent, c0, c1)
                                           : best_categorical(f, rows, parent, c0, c1);
            if (s.gain > best.gain + 1e-12) best = std::move(s);
        }
        if (best.feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : rows) (goes_left(best, r) ? left : right).push_back(r);
        importance_[best.feature] += best.gain;
        nodes_[id].split = best;
        const int l = build(std::move(left), depth + 1);
        const int rr = build(std::move(right), depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = rr;
        return id;
    }

    double gain_of(double parent, double l0, double l1, double r0, double r1) const {
        const auto min_leaf = static_cast<double>(options_.min_samples_leaf);
        if (l0 + l1 < min_leaf || r0 + r1 < min_leaf) return 0.0;
        return parent - gini(l0, l1) * (l0 + l1) - gini(r0, r1) * (r0 + r1);
    }

    Split best_numeric(std::size_t f, const std::vector<std::size_t>& rows, double parent, double c0,
                       double c1) const {
        const auto& values = features_[f].values;
        std::vector<std::pair<double, std::uint8_t>> present;
        present.reserve(rows.size());
        for (auto r : rows) {
            if (!std::isnan(values[r])) present.emplace_back(values[r], origin_[r]);
        }
        std::sort(present.begin(), present.end());
        Split best;
        best.feature = -1;
        double l0 = 0.0;
        double l1 = 0.0;
        for (std::size_t k = 0; k + 1 < present.size(); ++k) {
            (present[k].second ? l1 : l0) += 1.0;
            if (present[k].first == present[k + 1].first) continue;
            const double g = gain_of(parent, l0, l1, c0 - l0, c1 - l1);
            if (g > best.gain + 1e-12) {
                const double a = present[k].first;
                const double b = present[k + 1].first;
                double mid = a + (b - a) / 2.0;
                if (!(mid < b)) mid = a;
                best.feature = static_cast<int>(f);
                best.threshold = mid;
                best.gain = g;
            }
        }
        return best;
    }

    Split best_categorical(std::size_t f, const std::vector<std::size_t>& rows, double parent, double c0,
                           double c1) const {
        const auto& codes = features_[f].codes;
        std::map<std::int32_t, std::pair<double, double>> counts;  // code -> (origin 0, origin 1)
        for (auto r : rows) {
            if (codes[r] == kNullCode) continue;
            auto& c = counts[codes[r]];
            (origin_[r] ? c.second : c.first) += 1.0;
        }
        std::vector<std::pair<std::int32_t, std::pair<double, double>>> top(counts.begin(), counts.end());
        std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
            return a.second.first + a.second.second > b.second.first + b.second.second;
        });
        if (top.size() > options_.max_split_categories) top.resize(options_.max_split_categories);
        // For a binary target, the best subset is a prefix of the categories
        // ordered by their positive rate.
        std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
            const double ra = a.second.second / (a.second.first + a.second.second);
            const double rb = b.second.second / (b.second.first + b.second.second);
            return ra < rb;
        });
        Split best;
        best.feature = -1;
        double l0 = 0.0;
        double l1 = 0.0;
        for (std::size_t k = 0; k < top.size(); ++k) {
            l0 += top[k].second.first;
            l1 += top[k].second.second;
            const double g = gain_of(parent, l0, l1, c0 - l0, c1 - l1);
            if (g > best.gain + 1e-12) {
                best.feature = static_cast<int>(f);
                best.gain = g;
                best.left.clear();
                for (std::size_t j = 0; j <= k; ++j) best.left.push_back(top[j].first);
                std::sort(best.left.begin(), best.left.end());
            }
        }
        return best;
    }

    const std::vector<Feature>& features_;
    const std::vector<std::uint8_t>& origin_;
    const DriftClassifierOptions& options_;
    std::vector<Node> nodes_;
    std::vector<double> importance_;
};

}  // namespace

std::optional<DriftClassifierResult> domain_classifier_drift(const TableFrame& train, const TableFrame& test,
                                                             const DriftClassifierOptions& options) {
    if (train.row_count == 0 || test.row_count == 0 ||
        train.row_count + test.row_count < options.min_total_rows) {
        return std::nullopt;
    }

    std::mt19937_64 rng(options.seed);
    auto sample = [&](std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        shuffle(idx, rng);
        if (idx.size() > options.max_rows_per_split) idx.resize(options.max_rows_per_split);
        return idx;
    };
    const auto train_rows = sample(train.row_count);
    const auto test_rows = sample(test.row_count);

    // Stack sampled rows: train first (origin 0), then test (origin 1).
    std::vector<std::uint8_t> origin(train_rows.size(), 0);
    origin.resize(train_rows.size() + test_rows.size(), 1);

    std::vector<Feature> features;
    for (auto idx : train.schema.feature_columns()) {
        const auto kind = train.schema.columns[idx].kind;
        if (kind != ColumnKind::numeric && kind != ColumnKind::categorical) continue;
        const auto& a = train.columns[idx];
        const auto& b = test.column(train.schema.columns[idx].name);
        Feature f;
        f.name = train.schema.columns[idx].name;
        f.numeric = kind == ColumnKind::numeric;
        if (f.numeric) {
            f.values.reserve(origin.size());
            for (auto r : train_rows) f.values.push_back(a.numbers[r]);
            for (auto r : test_rows) f.values.push_back(b.numbers[r]);
        } else {
            std::unordered_map<std::string, std::int32_t> shared;
            auto recode = [&](const artifact::Column& col) {
                std::vector<std::int32_t> map(col.dictionary.size());
                for (std::size_t c = 0; c < col.dictionary.size(); ++c) {
                    map[c] = shared.try_emplace(col.dictionary[c], static_cast<std::int32_t>(shared.size()))
                                 .first->second;
                }
                return map;
            };
            const auto ma = recode(a);
            const auto mb = recode(b);
            f.codes.reserve(origin.size());
            for (auto r : train_rows) f.codes.push_back(a.codes[r] == kNullCode ? kNullCode : ma[a.codes[r]]);
            for (auto r : test_rows) f.codes.push_back(b.codes[r] == kNullCode ? kNullCode : mb[b.codes[r]]);
        }
        features.push_back(std::move(f));
    }
    if (features.empty()) return std::nullopt;

    std::vector<std::size_t> fit;
    std::vector<std::size_t> holdout;
    auto stratify = [&](std::size_t offset, std::size_t count) {
        if (count == 0) return;
        auto k = static_cast<std::size_t>(std::floor(options.fit_fraction * static_cast<double>(count)));
        k = std::clamp<std::size_t>(k, 1, count > 1 ? count - 1 : 1);
        for (std::size_t i = 0; i < count; ++i) (i < k ? fit : holdout).push_back(offset + i);
    };
    stratify(0, train_rows.size());
    stratify(train_rows.size(), test_rows.size());

    TreeBuilder tree(features, origin, options);
    tree.fit(fit);

    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (auto r : holdout) {
        scores.push_back(tree.predict(r));
        labels.push_back(origin[r]);
    }
    auto auc = auc_roc(scores, labels);
    if (!auc) return std::nullopt;

    DriftClassifierResult result;
    result.auc = *auc;
    result.drift_score = std::max(0.0, 2.0 * *auc - 1.0);
    const auto& gains = tree.importance();
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    for (std::size_t f = 0; f < features.size(); ++f) {
        if (gains[f] > 0.0) result.contributions.push_back({features[f].name, gains[f] / total});
    }
    std::sort(result.contributions.begin(), result.contributions.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    return result;
}

}  // namespace mlfix::checks
