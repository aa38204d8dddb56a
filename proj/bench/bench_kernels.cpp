// Serial reference versus OpenMP kernel for each parallel hot path.
// Arg(0) runs the serial reference; Arg(n > 0) runs the parallel kernel with n workers.

#include <benchmark/benchmark.h>

#include "ez/parallel.hpp"
#include "ez/training.hpp"

using namespace ez;

namespace {

GenerationConfig generation_config() {
    GenerationConfig cfg;
    cfg.solver = default_solver_config(sam_a());
    cfg.solver.dt = 0.02;
    return cfg;
}

/// Smooth synthetic rows; the kernels' cost does not depend on where targets come from.
const std::vector<Sample>& rows() {
    static const std::vector<Sample> data = [] {
        std::vector<Sample> out;
        for (const Point3& p : lhs(2000, {{{-5000, 45000}, {200, 850}, {0, 180}}}, 3)) {
            const double a = p[2] / 180.0;
            out.push_back({p[0], p[1], p[2], 8.0 + 4e-4 * p[0] + 0.01 * p[1] + 12.0 * a * a});
        }
        return out;
    }();
    return data;
}

std::vector<Point3> points(std::span<const Sample> s) {
    std::vector<Point3> x;
    for (const Sample& r : s) x.push_back(features_of(r));
    return x;
}

std::vector<double> targets(std::span<const Sample> s) {
    std::vector<double> y;
    for (const Sample& r : s) y.push_back(r.max_range_nm);
    return y;
}

int workers_of(const benchmark::State& state) { return static_cast<int>(state.range(0)); }

void BM_GenerateDataset(benchmark::State& state) {
    GenerationConfig cfg = generation_config();
    cfg.workers = workers_of(state);
    for (auto _ : state) {
        const Dataset d = cfg.workers == 0 ? generate_dataset_serial(sam_a(), sector_by_id(4), 16, 1, cfg)
                                           : generate_dataset(sam_a(), sector_by_id(4), 16, 1, cfg);
        benchmark::DoNotOptimize(d.rows.data());
    }
}

void BM_FitForest(benchmark::State& state) {
    const auto x = points(rows());
    const auto y = targets(rows());
    const RfrHyper h;
    for (auto _ : state) {
        const ForestModel f = workers_of(state) == 0 ? fit_forest_serial(x, y, h, 1)
                                                     : fit_forest(x, y, h, 1, workers_of(state));
        benchmark::DoNotOptimize(f.trees.data());
    }
}

void BM_GridSearchPr(benchmark::State& state) {
    GridSearchConfig cfg;
    cfg.grid = default_grid(Method::PR);
    cfg.workers = workers_of(state);
    const std::span<const Sample> train(rows());
    for (auto _ : state) {
        const auto r = cfg.workers == 0 ? grid_search_serial(Method::PR, train, 1, cfg)
                                        : grid_search(Method::PR, train, 1, cfg);
        benchmark::DoNotOptimize(r.report.scores.data());
    }
}

void BM_PredictBatchForest(benchmark::State& state) {
    RfrHyper h;
    h.n_estimators = 100;
    const TrainedModel m = fit_rfr(rows(), h, 1);
    std::vector<EngagementQuery> q;
    for (int rep = 0; rep < 10; ++rep)
        for (const Sample& r : rows()) q.push_back(r.query());
    for (auto _ : state) {
        const auto out = workers_of(state) == 0 ? m.predict_batch(q) : m.predict_batch_parallel(q, workers_of(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}

void worker_args(benchmark::internal::Benchmark* b) {
    b->Arg(0);
    for (int w = 1; w <= default_workers(); w *= 2) b->Arg(w);
    b->Unit(benchmark::kMillisecond)->UseRealTime();
}

} // namespace

BENCHMARK(BM_GenerateDataset)->Apply(worker_args);
BENCHMARK(BM_FitForest)->Apply(worker_args);
BENCHMARK(BM_GridSearchPr)->Apply(worker_args);
BENCHMARK(BM_PredictBatchForest)->Apply(worker_args);

BENCHMARK_MAIN();
