#include "ez/forest.hpp"

#include <algorithm>
#include <numeric>

#include "ez/error.hpp"
#include "ez/parallel.hpp"
#include "ez/rng.hpp"

namespace ez {

double RegressionTree::predict(const Point3& x) const {
    std::size_t node = 0;
    while (feature[node] >= 0) {
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node]
                                                                                                   : right[node]);
    }
    return value[node];
}

namespace {

struct Builder {
    std::span<const Point3> x;
    std::span<const double> y;
    const RfrHyper& hyper;
    Rng rng;
    RegressionTree tree;

    int add_leaf(double v) {
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.value.push_back(v);
        return static_cast<int>(tree.feature.size()) - 1;
    }

    std::vector<int> candidate_features() {
        std::vector<int> f = {0, 1, 2};
        const int m = std::clamp(hyper.max_features, 1, 3);
        if (m < 3) {
            rng.shuffle(f);
            f.resize(static_cast<std::size_t>(m));
            std::sort(f.begin(), f.end());
        }
        return f;
    }

    int build(std::vector<std::size_t>& idx, int depth) {
        const std::size_t n = idx.size();
        double sum = 0.0;
        double ymin = y[idx[0]];
        double ymax = ymin;
        for (std::size_t i : idx) {
            sum += y[i];
            ymin = std::min(ymin, y[i]);
            ymax = std::max(ymax, y[i]);
        }
        const double mean = sum / static_cast<double>(n);
        const auto min_leaf = static_cast<std::size_t>(std::max(1, hyper.min_samples_leaf));
        if (n < static_cast<std::size_t>(std::max(2, hyper.min_samples_split)) || ymin == ymax ||
            (hyper.max_depth > 0 && depth >= hyper.max_depth) || n < 2 * min_leaf)
            return add_leaf(mean);

        // Maximize sumL^2/nL + sumR^2/nR, which is equivalent to maximal variance reduction.
        double best_score = sum * sum / static_cast<double>(n);
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order(idx);
        for (int f : candidate_features()) {
            const auto fd = static_cast<std::size_t>(f);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x[a][fd] < x[b][fd] || (x[a][fd] == x[b][fd] && a < b);
            });
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += y[order[i]];
                const double xv = x[order[i]][fd];
                const double xn = x[order[i + 1]][fd];
                if (!(xv < xn)) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double right_sum = sum - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(nl) +
                                     right_sum * right_sum / static_cast<double>(nr);
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    double mid = 0.5 * (xv + xn);
                    if (!(mid < xn)) mid = xv;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return add_leaf(mean);

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        const auto bf = static_cast<std::size_t>(best_feature);
        for (std::size_t i : idx) (x[i][bf] <= best_threshold ? left_idx : right_idx).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int node = add_leaf(mean);
        tree.feature[static_cast<std::size_t>(node)] = best_feature;
        tree.threshold[static_cast<std::size_t>(node)] = best_threshold;
        const int l = build(left_idx, depth + 1);
        const int r = build(right_idx, depth + 1);
        tree.left[static_cast<std::size_t>(node)] = l;
        tree.right[static_cast<std::size_t>(node)] = r;
        return node;
    }
};

void check_inputs(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper) {
    if (x.size() != y.size()) throw ValidationError("fit_forest: x/y length mismatch");
    if (x.empty()) throw ValidationError("fit_forest: no rows");
    if (hyper.n_estimators < 1) throw ValidationError("fit_forest: n_estimators must be >= 1");
}

RegressionTree grow_member(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper,
                           std::uint64_t seed, std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, {t});
    std::vector<std::size_t> sample;
    if (hyper.bootstrap) {
        Rng rng(derive_seed(tree_seed, {0xB007ULL}));
        sample.resize(x.size());
        for (std::size_t& s : sample) s = rng.below(x.size());
    } else {
        sample = iota_indices(x.size());
    }
    return grow_tree(x, y, std::move(sample), hyper, tree_seed);
}

} // namespace

RegressionTree grow_tree(std::span<const Point3> x, std::span<const double> y, std::vector<std::size_t> sample,
                         const RfrHyper& hyper, std::uint64_t seed) {
    if (sample.empty()) throw ValidationError("grow_tree: empty sample");
    Builder b{x, y, hyper, Rng(seed), {}};
    b.build(sample, 0);
    return std::move(b.tree);
}

double ForestModel::eval(const Point3& x) const {
    double sum = 0.0;
    for (const RegressionTree& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

ForestModel fit_forest(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper,
                       std::uint64_t seed, int workers) {
    check_inputs(x, y, hyper);
    ForestModel m;
    m.hyper = hyper;
    m.trees.resize(static_cast<std::size_t>(hyper.n_estimators));
    parallel_for(m.trees.size(), workers, [&](std::size_t t) { m.trees[t] = grow_member(x, y, hyper, seed, t); });
    return m;
}

ForestModel fit_forest_serial(std::span<const Point3> x, std::span<const double> y, const RfrHyper& hyper,
                              std::uint64_t seed) {
    check_inputs(x, y, hyper);
    ForestModel m;
    m.hyper = hyper;
    m.trees.resize(static_cast<std::size_t>(hyper.n_estimators));
    serial_for(m.trees.size(), [&](std::size_t t) { m.trees[t] = grow_member(x, y, hyper, seed, t); });
    return m;
}

} // namespace ez
