#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ez/model.hpp"

namespace ez {

/// 100 |y_hat - y| / y. Throws DomainError unless y > 0.
double percentage_error(double y, double y_hat);

/// Rows whose percentage error strictly exceeds threshold_pct.
std::size_t count_outliers(std::span<const double> y, std::span<const double> y_hat, double threshold_pct = 10.0);

/// 1 - SSE/SST. Needs n >= 2; throws DomainError when the targets have zero variance.
double r2(std::span<const double> y, std::span<const double> y_hat);
double rmse(std::span<const double> y, std::span<const double> y_hat);
/// Mean percentage error, in percent.
double mape(std::span<const double> y, std::span<const double> y_hat);

struct Timing {
    double pt_s = 0;
    double per_shot_s = 0;
};

/// Median of three single-threaded wall-clock runs of predict_batch, scaling included.
Timing time_batch_predict(const TrainedModel& model, std::span<const EngagementQuery> queries);

struct MetricsRow {
    std::string sam_id;
    Sector sector;
    Method method = Method::PR;
    double r2 = 0;
    double rmse_nm = 0;
    double mape_pct = 0;
    double pt_s = 0;
    std::size_t n_test = 0;
    double per_shot_s = 0;
    std::size_t outlier_count = 0;
};

MetricsRow evaluate_model(const TrainedModel& model, std::span<const Sample> test);

struct Report {
    std::string sam_id;
    std::vector<MetricsRow> rows; // sector id, then PR/ANN/RFR

    const MetricsRow* find(const Sector& s, Method m) const;
    /// Six sample sets times three methods.
    bool complete() const;
};

/// Sorts rows into report order. Throws ValidationError on empty input, mixed archetypes or a
/// repeated (sector, method) cell.
Report build_report(std::vector<MetricsRow> rows);

inline constexpr std::string_view kReportHeader =
    "sam_id,sector,method,r2,rmse_nm,mape_pct,pt_s,n_test,per_shot_s,outlier_count";

std::string report_csv(const Report& r);
Report parse_report_csv(std::string_view text);
Report read_report_csv(const std::filesystem::path& path);

/// Aligned text tables, two sample sets side by side: R2 and RMSE to 4 decimals, MAPE to 2
/// with a percent sign, PT to 4.
std::string render_report_table(const Report& r);

} // namespace ez
