#include "ez/multimodel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ez/error.hpp"

namespace ez {

using Json = nlohmann::ordered_json;

std::string_view to_string(PlanKind k) {
    switch (k) {
    case PlanKind::Single: return "Single";
    case PlanKind::Homogeneous: return "Homogeneous";
    case PlanKind::Heterogeneous: return "Heterogeneous";
    }
    return "?";
}

std::string_view to_string(PolicyKind k) { return k == PolicyKind::Accuracy ? "accuracy" : "speed"; }

PolicyKind parse_policy(std::string_view s) {
    std::string lower(s);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "accuracy") return PolicyKind::Accuracy;
    if (lower == "speed") return PolicyKind::Speed;
    throw ValidationError("unknown policy '" + std::string(s) + "' (expected accuracy or speed)");
}

std::string model_filename(std::string_view sam_id, const Sector& sector, Method method) {
    std::string name(sam_id);
    name += '_' + sector_token(sector) + '_';
    for (char c : to_string(method)) name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return name + ".json";
}

namespace {

std::string num(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string cell(const MetricsRow& r) {
    return sector_label(r.sector) + " " + std::string(to_string(r.method)) + " (RMSE " + num(r.rmse_nm, 4) +
           " nm, MAPE " + num(r.mape_pct, 2) + "%, per-shot " + num(r.per_shot_s, 6) + " s)";
}

// RMSE, then MAPE, then per-shot time.
bool more_accurate(const MetricsRow& a, const MetricsRow& b) {
    if (a.rmse_nm != b.rmse_nm) return a.rmse_nm < b.rmse_nm;
    if (a.mape_pct != b.mape_pct) return a.mape_pct < b.mape_pct;
    return a.per_shot_s < b.per_shot_s;
}

// Per-shot time, then RMSE.
bool faster(const MetricsRow& a, const MetricsRow& b) {
    if (a.per_shot_s != b.per_shot_s) return a.per_shot_s < b.per_shot_s;
    return a.rmse_nm < b.rmse_nm;
}

template <typename Better, typename Accept>
const MetricsRow* pick(const Report& r, const Sector& s, Better better, Accept accept) {
    const MetricsRow* best = nullptr;
    for (Method m : kMethods) {
        const MetricsRow* row = r.find(s, m);
        if (row && accept(*row) && (!best || better(*row, *best))) best = row;
    }
    return best;
}

Assignment assign(const Report& r, const MetricsRow& row) {
    return {row.sector, row.method, model_filename(r.sam_id, row.sector, row.method)};
}

CompositionPlan sector_plan(const Report& r, const std::vector<const MetricsRow*>& winners) {
    CompositionPlan plan;
    plan.sam_id = r.sam_id;
    bool same = true;
    for (const MetricsRow* w : winners) {
        plan.assignments.push_back(assign(r, *w));
        same = same && w->method == winners.front()->method;
    }
    plan.kind = same ? PlanKind::Homogeneous : PlanKind::Heterogeneous;
    return plan;
}

CompositionPlan single_plan(const Report& r, const MetricsRow& whole) {
    CompositionPlan plan;
    plan.sam_id = r.sam_id;
    plan.kind = PlanKind::Single;
    plan.assignments.push_back(assign(r, whole));
    return plan;
}

} // namespace

CompositionPlan compose_accuracy(const Report& report, double eps_rmse_nm, double eps_mape_pct) {
    if (!report.complete())
        throw ValidationError("compose_accuracy: report must hold all 18 (sample set, method) rows");
    const auto all = [](const MetricsRow&) { return true; };
    std::vector<std::string> trace;
    std::vector<const MetricsRow*> winners;
    for (int id = 0; id < kSectorCount; ++id) {
        winners.push_back(pick(report, sector_by_id(id), more_accurate, all));
        trace.push_back("sector winner " + cell(*winners.back()));
    }
    const MetricsRow* whole = pick(report, whole_sector(), more_accurate, all);
    trace.push_back("whole winner " + cell(*whole));

    bool whole_ok = true;
    for (const MetricsRow* w : winners) {
        const double d_rmse = whole->rmse_nm - w->rmse_nm;
        const double d_mape = whole->mape_pct - w->mape_pct;
        const bool ok = d_rmse <= eps_rmse_nm && d_mape <= eps_mape_pct;
        trace.push_back(sector_label(w->sector) + ": whole minus winner RMSE " + num(d_rmse, 4) + " nm (limit " +
                        num(eps_rmse_nm, 4) + "), MAPE " + num(d_mape, 2) + " points (limit " +
                        num(eps_mape_pct, 2) + ") -> " + (ok ? "within" : "exceeds"));
        whole_ok = whole_ok && ok;
    }
    CompositionPlan plan = whole_ok ? single_plan(report, *whole) : sector_plan(report, winners);
    plan.policy = {PolicyKind::Accuracy, eps_rmse_nm, eps_mape_pct, Policy{}.rmse_cap_nm};
    trace.push_back(std::string("chosen: ") + std::string(to_string(plan.kind)));
    plan.justification = std::move(trace);
    return plan;
}

CompositionPlan compose_speed(const Report& report, double rmse_cap_nm) {
    if (!report.complete()) throw ValidationError("compose_speed: report must hold all 18 (sample set, method) rows");
    const auto under_cap = [&](const MetricsRow& r) { return r.rmse_nm <= rmse_cap_nm; };
    std::vector<std::string> trace;
    std::vector<const MetricsRow*> winners;
    bool covered = true;
    double sector_worst = 0;
    for (int id = 0; id < kSectorCount; ++id) {
        const Sector s = sector_by_id(id);
        const MetricsRow* w = pick(report, s, faster, under_cap);
        if (w) {
            trace.push_back("fastest under cap " + cell(*w));
            sector_worst = std::max(sector_worst, w->per_shot_s);
        } else {
            trace.push_back(sector_label(s) + ": no model with RMSE <= " + num(rmse_cap_nm, 4) + " nm");
            covered = false;
        }
        winners.push_back(w);
    }
    const MetricsRow* whole = pick(report, whole_sector(), faster, under_cap);
    trace.push_back(whole ? "fastest whole under cap " + cell(*whole)
                          : "whole: no model with RMSE <= " + num(rmse_cap_nm, 4) + " nm");

    CompositionPlan plan;
    if (whole && (!covered || whole->per_shot_s <= sector_worst)) {
        plan = single_plan(report, *whole);
    } else if (covered) {
        plan = sector_plan(report, winners);
    } else {
        throw InfeasibleError("compose_speed: no sector cover or whole model meets RMSE cap " +
                              num(rmse_cap_nm, 4) + " nm");
    }
    if (whole && covered)
        trace.push_back("worst per-shot: sectors " + num(sector_worst, 6) + " s, whole " +
                        num(whole->per_shot_s, 6) + " s");
    plan.policy = {PolicyKind::Speed, Policy{}.eps_rmse_nm, Policy{}.eps_mape_pct, rmse_cap_nm};
    trace.push_back(std::string("chosen: ") + std::string(to_string(plan.kind)));
    plan.justification = std::move(trace);
    return plan;
}

std::string plan_to_json(const CompositionPlan& plan) {
    Json j;
    j["format_version"] = 1;
    j["sam_id"] = plan.sam_id;
    Json params;
    if (plan.policy.kind == PolicyKind::Accuracy) {
        params["eps_rmse_nm"] = plan.policy.eps_rmse_nm;
        params["eps_mape_pct"] = plan.policy.eps_mape_pct;
    } else {
        params["rmse_cap_nm"] = plan.policy.rmse_cap_nm;
    }
    j["policy"] = {{"name", std::string(to_string(plan.policy.kind))}, {"parameters", params}};
    j["kind"] = std::string(to_string(plan.kind));
    Json assignments = Json::array();
    for (const Assignment& a : plan.assignments)
        assignments.push_back({{"sector", sector_token(a.sector)},
                               {"interval", sector_label(a.sector)},
                               {"method", std::string(to_string(a.method))},
                               {"model", a.model_path}});
    j["assignments"] = assignments;
    j["justification"] = plan.justification;
    return j.dump(2) + "\n";
}

CompositionPlan plan_from_json(std::string_view text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("format_version").get<int>() != 1) throw ArtifactError("manifest: unsupported format_version");
        CompositionPlan plan;
        plan.sam_id = j.at("sam_id").get<std::string>();
        const Json& pol = j.at("policy");
        plan.policy.kind = parse_policy(pol.at("name").get<std::string>());
        const Json& params = pol.at("parameters");
        if (plan.policy.kind == PolicyKind::Accuracy) {
            plan.policy.eps_rmse_nm = params.at("eps_rmse_nm").get<double>();
            plan.policy.eps_mape_pct = params.at("eps_mape_pct").get<double>();
        } else {
            plan.policy.rmse_cap_nm = params.at("rmse_cap_nm").get<double>();
        }
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "Single") plan.kind = PlanKind::Single;
        else if (kind == "Homogeneous") plan.kind = PlanKind::Homogeneous;
        else if (kind == "Heterogeneous") plan.kind = PlanKind::Heterogeneous;
        else throw ArtifactError("manifest: unknown kind '" + kind + "'");
        for (const Json& a : j.at("assignments"))
            plan.assignments.push_back({parse_sector(a.at("sector").get<std::string>()),
                                        parse_method(a.at("method").get<std::string>()),
                                        a.at("model").get<std::string>()});
        plan.justification = j.at("justification").get<std::vector<std::string>>();

        const std::size_t expected = plan.kind == PlanKind::Single ? 1 : kSectorCount;
        if (plan.assignments.size() != expected) throw ArtifactError("manifest: wrong number of assignments");
        for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
            const int want = plan.kind == PlanKind::Single ? kWholeSector : static_cast<int>(i);
            if (plan.assignments[i].sector.id != want) throw ArtifactError("manifest: assignments out of order");
        }
        return plan;
    } catch (const Json::exception& e) {
        throw ArtifactError(std::string("manifest: ") + e.what());
    } catch (const ValidationError& e) {
        throw ArtifactError(std::string("manifest: ") + e.what());
    }
}

Multimodel::Multimodel(CompositionPlan plan, std::vector<TrainedModel> models)
    : plan_(std::move(plan)), models_(std::move(models)) {
    if (models_.size() != plan_.assignments.size())
        throw ValidationError("multimodel: one model per assignment required");
}

Multimodel Multimodel::load(const std::filesystem::path& manifest) {
    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw ArtifactError("cannot open manifest " + manifest.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    CompositionPlan plan = plan_from_json(buffer.str());
    std::vector<TrainedModel> models;
    for (const Assignment& a : plan.assignments) {
        const std::filesystem::path path = manifest.parent_path() / a.model_path;
        if (!std::filesystem::exists(path)) throw ArtifactError("manifest references missing model " + path.string());
        models.push_back(load_model(path));
    }
    return Multimodel(std::move(plan), std::move(models));
}

const TrainedModel& Multimodel::route(double aspect_deg) const {
    if (plan_.kind == PlanKind::Single) return models_.front();
    return models_.at(static_cast<std::size_t>(sector_of(aspect_deg).id));
}

double Multimodel::predict(const EngagementQuery& q) const { return route(q.aspect_deg).predict(q); }

std::vector<double> Multimodel::predict_batch(std::span<const EngagementQuery> queries) const {
    std::vector<std::vector<std::size_t>> groups(models_.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const std::size_t g =
            plan_.kind == PlanKind::Single ? 0 : static_cast<std::size_t>(sector_of(queries[i].aspect_deg).id);
        groups[g].push_back(i);
    }
    std::vector<double> out(queries.size());
    std::vector<EngagementQuery> batch;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) continue;
        batch.clear();
        for (std::size_t i : groups[g]) batch.push_back(queries[i]);
        const std::vector<double> part = models_[g].predict_batch(batch);
        for (std::size_t k = 0; k < groups[g].size(); ++k) out[groups[g][k]] = part[k];
    }
    return out;
}

} // namespace ez
