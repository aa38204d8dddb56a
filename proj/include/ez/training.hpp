#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ez/model.hpp"

namespace ez {

/// One grid point. Only the member matching `method` is meaningful.
struct HyperChoice {
    Method method = Method::PR;
    PrHyper pr;
    MlpHyper mlp;
    RfrHyper rfr;

    std::string label() const;
    /// Model size used to break CV ties: feature count (PR), weight count (ANN), 0 (RFR).
    std::size_t complexity() const;
};

/// PR: six degrees; ANN: layers x units (9 points); RFR: the single default point.
std::vector<HyperChoice> default_grid(Method m);

struct CvScores {
    MeanStd rmse_nm;
    MeanStd mape_pct;
    MeanStd r2;
};

struct CvReport {
    Method method = Method::PR;
    int folds = 0;
    std::vector<HyperChoice> grid;
    std::vector<CvScores> scores; // parallel to grid
    std::size_t best = 0;

    /// e.g. "1.4429 nm ± 0.1765 nm"
    std::string rmse_text(std::size_t i) const;
    /// e.g. "0.92% ± 0.11%"
    std::string mape_text(std::size_t i) const;
};

struct GridSearchConfig {
    int folds = 5;
    int workers = 0;
    /// Fraction of the fitting rows used for ANN weight updates; the rest drive early stopping.
    double ann_fit_fraction = 0.9;
    /// Overrides default_grid when non-empty.
    std::vector<HyperChoice> grid;
};

struct GridSearchResult {
    HyperChoice best;
    TrainedModel model;
    CvReport report;
};

/// Per-grid-point k-fold CV on mean RMSE; lowest wins, ties go to the smaller model. PR points
/// with at least as many features as the smallest fold has rows are left out. The winner
/// is refit on all of `train`. (grid point, fold) units run in parallel with seeds derived from
/// (seed, method, point, fold), so results do not depend on the worker count.
GridSearchResult grid_search(Method method, std::span<const Sample> train, std::uint64_t seed,
                             const GridSearchConfig& cfg = {});
GridSearchResult grid_search_serial(Method method, std::span<const Sample> train, std::uint64_t seed,
                                    const GridSearchConfig& cfg = {});

/// Fits one grid point. ANN rows are split by `seed` into fit and early-stopping parts.
TrainedModel fit_choice(const HyperChoice& choice, std::span<const Sample> rows, std::uint64_t seed,
                        double ann_fit_fraction, int workers);

} // namespace ez
