#include "ez/training.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ez/error.hpp"
#include "ez/evaluation.hpp"
#include "ez/parallel.hpp"

namespace ez {

std::string HyperChoice::label() const {
    std::ostringstream os;
    switch (method) {
    case Method::PR: os << "PR degree " << pr.max_degree << " interact " << pr.max_interact_degree; break;
    case Method::ANN: os << "ANN " << mlp.hidden_layers << "x" << mlp.units; break;
    case Method::RFR: os << "RFR " << rfr.n_estimators << " trees"; break;
    }
    return os.str();
}

std::size_t HyperChoice::complexity() const {
    switch (method) {
    case Method::PR: return poly_exponents(pr).size();
    case Method::ANN: {
        const auto u = static_cast<std::size_t>(mlp.units);
        const auto l = static_cast<std::size_t>(mlp.hidden_layers);
        return (3 * u + u) + (l - 1) * (u * u + u) + (u + 1);
    }
    case Method::RFR: return 0;
    }
    return 0;
}

std::vector<HyperChoice> default_grid(Method m) {
    std::vector<HyperChoice> grid;
    switch (m) {
    case Method::PR:
        for (int d : kPrDegreeGrid) {
            HyperChoice c;
            c.method = m;
            c.pr.max_degree = d;
            grid.push_back(c);
        }
        break;
    case Method::ANN:
        for (int layers : kMlpLayerGrid)
            for (int units : kMlpUnitGrid) {
                HyperChoice c;
                c.method = m;
                c.mlp.hidden_layers = layers;
                c.mlp.units = units;
                grid.push_back(c);
            }
        break;
    case Method::RFR: {
        HyperChoice c;
        c.method = m;
        grid.push_back(c);
        break;
    }
    }
    return grid;
}

namespace {

std::string pm_text(double mean, double std, const char* unit) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.4f%s ± %.4f%s", mean, unit, std, unit);
    return buf;
}

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd out;
    for (double x : v) out.mean += x;
    out.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return out;
}

struct FoldScore {
    double rmse = 0;
    double mape = 0;
    double r2 = 0;
};

template <typename Loop>
GridSearchResult grid_search_with(Method method, std::span<const Sample> train, std::uint64_t seed,
                                  const GridSearchConfig& cfg, Loop&& loop) {
    if (cfg.folds < 2) throw ValidationError("grid_search: folds must be >= 2");
    if (train.size() < static_cast<std::size_t>(cfg.folds))
        throw ValidationError("grid_search: need at least " + std::to_string(cfg.folds) + " training rows");
    const std::size_t k_folds = static_cast<std::size_t>(cfg.folds);
    const std::size_t fold_rows = train.size() - (train.size() + k_folds - 1) / k_folds;
    std::vector<HyperChoice> grid;
    for (const HyperChoice& c : cfg.grid.empty() ? default_grid(method) : cfg.grid) {
        if (c.method != method) throw ValidationError("grid_search: grid point of another method");
        // A polynomial basis wider than the smallest fold is underdetermined there.
        if (method == Method::PR && c.complexity() >= fold_rows) continue;
        grid.push_back(c);
    }
    if (grid.empty())
        throw ValidationError("grid_search: " + std::to_string(fold_rows) +
                              " rows per fold are too few for any grid point");

    const auto m = static_cast<std::uint64_t>(method);
    const auto folds = kfold(train.size(), cfg.folds, derive_seed(seed, {m, 0x464f4c44ULL}));
    const std::size_t k = folds.size();
    std::vector<FoldScore> scores(grid.size() * k);

    loop(scores.size(), [&](std::size_t unit) {
        const std::size_t point = unit / k;
        const std::size_t fold = unit % k;
        std::vector<char> held(train.size(), 0);
        for (std::size_t i : folds[fold]) held[i] = 1;
        std::vector<Sample> fit_rows;
        std::vector<Sample> val_rows;
        fit_rows.reserve(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) (held[i] ? val_rows : fit_rows).push_back(train[i]);

        const TrainedModel model =
            fit_choice(grid[point], fit_rows, derive_seed(seed, {m, point, fold}), cfg.ann_fit_fraction, 1);
        std::vector<EngagementQuery> q;
        std::vector<double> y;
        for (const Sample& s : val_rows) {
            q.push_back(s.query());
            y.push_back(s.max_range_nm);
        }
        const std::vector<double> y_hat = model.predict_batch(q);
        FoldScore& out = scores[unit];
        out.rmse = rmse(y, y_hat);
        out.mape = mape(y, y_hat);
        out.r2 = r2(y, y_hat);
    });

    CvReport report;
    report.method = method;
    report.folds = static_cast<int>(k);
    report.grid = grid;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        std::vector<double> e, a, r;
        for (std::size_t f = 0; f < k; ++f) {
            e.push_back(scores[p * k + f].rmse);
            a.push_back(scores[p * k + f].mape);
            r.push_back(scores[p * k + f].r2);
        }
        report.scores.push_back({mean_std(e), mean_std(a), mean_std(r)});
    }
    for (std::size_t p = 1; p < grid.size(); ++p) {
        const double cur = report.scores[p].rmse_nm.mean;
        const double best = report.scores[report.best].rmse_nm.mean;
        if (cur < best || (cur == best && grid[p].complexity() < grid[report.best].complexity())) report.best = p;
    }

    GridSearchResult result;
    result.best = grid[report.best];
    result.model = fit_choice(result.best, train, derive_seed(seed, {m, 0x52454649ULL}), cfg.ann_fit_fraction,
                              cfg.workers);
    result.model.meta.seed = seed;
    result.model.meta.cv_rmse_nm = report.scores[report.best].rmse_nm;
    result.model.meta.cv_mape_pct = report.scores[report.best].mape_pct;
    result.model.meta.cv_r2 = report.scores[report.best].r2;
    result.report = std::move(report);
    return result;
}

} // namespace

std::string CvReport::rmse_text(std::size_t i) const {
    return pm_text(scores.at(i).rmse_nm.mean, scores.at(i).rmse_nm.std, " nm");
}

std::string CvReport::mape_text(std::size_t i) const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f%% ± %.2f%%", scores.at(i).mape_pct.mean, scores.at(i).mape_pct.std);
    return buf;
}

TrainedModel fit_choice(const HyperChoice& choice, std::span<const Sample> rows, std::uint64_t seed,
                        double ann_fit_fraction, int workers) {
    switch (choice.method) {
    case Method::PR: return fit_pr(rows, choice.pr);
    case Method::RFR: return fit_rfr(rows, choice.rfr, seed, workers);
    case Method::ANN: {
        const std::vector<Sample> all(rows.begin(), rows.end());
        const Split carve = split_train_test(all, ann_fit_fraction, derive_seed(seed, {0x56414cULL}));
        if (carve.test.empty()) throw ValidationError("fit_choice: too few rows for an early-stopping carve-out");
        return fit_mlp(carve.train, carve.test, choice.mlp, seed);
    }
    }
    throw ValidationError("fit_choice: unknown method");
}

GridSearchResult grid_search(Method method, std::span<const Sample> train, std::uint64_t seed,
                             const GridSearchConfig& cfg) {
    return grid_search_with(method, train, seed, cfg,
                            [&](std::size_t n, auto&& body) { parallel_for(n, cfg.workers, body); });
}

GridSearchResult grid_search_serial(Method method, std::span<const Sample> train, std::uint64_t seed,
                                    const GridSearchConfig& cfg) {
    return grid_search_with(method, train, seed, cfg, [](std::size_t n, auto&& body) { serial_for(n, body); });
}

} // namespace ez
