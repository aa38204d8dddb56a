#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ez/sampling.hpp"

namespace ez {

/// Defaults follow the published configuration: 100 bootstrap trees, unrestricted depth,
/// split >= 2, leaf >= 1, all three features considered at each split.
struct RfrHyper {
    int n_estimators = 100;
    int max_depth = 0; // 0 = unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int max_features = 3;
    bool bootstrap = true;
    friend bool operator==(const RfrHyper&, const RfrHyper&) = default;
};

/// Flattened CART tree. Node i is a leaf when feature[i] < 0; otherwise samples with
/// x[feature] <= threshold go to left[i].
struct RegressionTree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;

    double predict(const Point3& x) const;
    std::size_t node_count() const { return feature.size(); }
};

/// One tree grown on the rows listed in `sample` (duplicates allowed) by exhaustive
/// variance-reduction splits. Ties prefer the lower feature index, then the smaller threshold.
RegressionTree grow_tree(std::span<const Point3> x, std::span<const double> y, std::vector<std::size_t> sample,
                         const RfrHyper& hyper, std::uint64_t seed);

struct ForestModel {
    RfrHyper hyper;
    std::vector<RegressionTree> trees;

    double eval(const Point3& x) const;
};

/// Trees are grown in parallel; tree t uses seed derive_seed(seed, t), so the result matches
/// fit_forest_serial exactly.
ForestModel fit_forest(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper,
                       std::uint64_t seed, int workers = 0);
ForestModel fit_forest_serial(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper,
                              std::uint64_t seed);

} // namespace ez
