#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ez/forest.hpp"
#include "ez/mlp.hpp"
#include "ez/poly.hpp"
#include "ez/sampling.hpp"
#include "ez/scaler.hpp"

namespace ez {

enum class Method { PR = 0, ANN = 1, RFR = 2 };

inline constexpr std::array<Method, 3> kMethods = {Method::PR, Method::ANN, Method::RFR};

std::string_view to_string(Method m);
/// Accepts PR/ANN/RFR in any case.
Method parse_method(std::string_view s);

/// Mean and sample standard deviation of a per-fold metric.
struct MeanStd {
    double mean = 0;
    double std = 0;
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    MeanStd cv_rmse_nm;
    MeanStd cv_mape_pct;
    MeanStd cv_r2;
    int epochs_run = 0;  // ANN only
    int best_epoch = 0;  // ANN only
    std::string train_sha256;
    std::string test_sha256;
    std::string test_path;
};

/// A fitted surrogate for one (archetype, sample set, method) cell.
struct TrainedModel {
    Method method = Method::PR;
    Sector sector;
    std::string sam_id;
    FeatureScaler scaler;
    std::variant<PolyModel, MlpModel, ForestModel> parameters;
    TrainingMeta meta;

    /// Max range (nm). Queries outside the input box extrapolate; see is_extrapolation.
    double predict(const EngagementQuery& q) const;
    std::vector<double> predict_batch(std::span<const EngagementQuery> queries) const;
    /// Parallel batch prediction across OpenMP workers, identical output to predict_batch.
    std::vector<double> predict_batch_parallel(std::span<const EngagementQuery> queries, int workers = 0) const;

    static bool is_extrapolation(const EngagementQuery& q) { return !in_box(q); }
    std::string hyper_summary() const;
};

/// PR: symmetric min-max scaling, least-squares polynomial fit.
TrainedModel fit_pr(std::span<const Sample> train, const PrHyper& hyper);
/// RFR: identity scaling, bootstrap CART forest.
TrainedModel fit_rfr(std::span<const Sample> train, const RfrHyper& hyper, std::uint64_t seed, int workers = 0);
/// ANN: z-score scaling fitted on `train`; `val` drives early stopping.
TrainedModel fit_mlp(std::span<const Sample> train, std::span<const Sample> val, const MlpHyper& hyper,
                     std::uint64_t seed);

/// JSON document with format_version, method, sam_id, sector, scaler, hyper, parameters, training.
std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(std::string_view text);
void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace ez
