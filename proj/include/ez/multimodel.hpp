#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ez/evaluation.hpp"
#include "ez/model.hpp"

namespace ez {

enum class PlanKind { Single, Homogeneous, Heterogeneous };
enum class PolicyKind { Accuracy, Speed };

std::string_view to_string(PlanKind k);
std::string_view to_string(PolicyKind k);
PolicyKind parse_policy(std::string_view s);

struct Policy {
    PolicyKind kind = PolicyKind::Accuracy;
    double eps_rmse_nm = 0.2;
    double eps_mape_pct = 0.2;
    double rmse_cap_nm = 1.0;
};

struct Assignment {
    Sector sector;
    Method method = Method::PR;
    std::string model_path; // relative to the manifest's directory
};

/// Single holds one Whole assignment; the other kinds hold the five sectors in order.
struct CompositionPlan {
    PlanKind kind = PlanKind::Single;
    std::string sam_id;
    Policy policy;
    std::vector<Assignment> assignments;
    std::vector<std::string> justification;
};

/// File name used for the model of one (archetype, sample set, method) cell.
std::string model_filename(std::string_view sam_id, const Sector& sector, Method method);

/// Per-sector winner by RMSE (then MAPE, then per-shot time). The best Whole model replaces the
/// sector cover when it is within eps of every sector winner on both RMSE and MAPE.
/// Throws ValidationError on an incomplete report.
CompositionPlan compose_accuracy(const Report& report, double eps_rmse_nm = 0.2, double eps_mape_pct = 0.2);

/// Fastest model per sector among rows with RMSE <= cap, versus the fastest Whole model under the
/// cap; the option with the smaller worst-case per-shot time wins, ties to Single.
/// Throws InfeasibleError when neither option exists.
CompositionPlan compose_speed(const Report& report, double rmse_cap_nm = 1.0);

std::string plan_to_json(const CompositionPlan& plan);
CompositionPlan plan_from_json(std::string_view text);

/// A plan with its models resolved and loaded; immutable and safe to query concurrently.
class Multimodel {
public:
    Multimodel(CompositionPlan plan, std::vector<TrainedModel> models);
    /// Loads every assignment's model relative to the manifest's directory; ArtifactError if absent.
    static Multimodel load(const std::filesystem::path& manifest);

    const CompositionPlan& plan() const { return plan_; }
    /// The model answering queries at this aspect.
    const TrainedModel& route(double aspect_deg) const;
    double predict(const EngagementQuery& q) const;
    std::vector<double> predict_batch(std::span<const EngagementQuery> queries) const;

private:
    CompositionPlan plan_;
    std::vector<TrainedModel> models_; // parallel to plan_.assignments
};

} // namespace ez
