#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "ez/error.hpp"
#include "ez/evaluation.hpp"
#include "ez/multimodel.hpp"
#include "ez/parallel.hpp"
#include "ez/sha256.hpp"
#include "ez/training.hpp"
#include "ez/units.hpp"

namespace ez::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kTrainRatio = 0.8;
constexpr std::uint64_t kSplitTag = 0x53504c4954ULL;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Write-once output. An existing file with identical bytes is left alone.
void write_output(const fs::path& path, std::string_view bytes, bool force) {
    if (fs::exists(path) && !force) {
        if (read_file(path) == bytes) return;
        throw ValidationError(path.string() + " already exists; pass --force to overwrite");
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write " + path.string());
    out << bytes;
}

fs::path sidecar_path(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".meta.json");
    return p;
}

Json query_json(const EngagementQuery& q) {
    return {{"alt_ft", q.elevation_ft}, {"speed_kt", q.speed_kt}, {"aspect_deg", q.aspect_deg}};
}

SolverConfig solver_for(const MissileParams& sam, std::optional<double> dt, std::optional<double> tol,
                        std::optional<double> scan_max) {
    SolverConfig cfg = default_solver_config(sam);
    if (dt) cfg.dt = *dt;
    if (tol) cfg.tolerance_nm = *tol;
    if (scan_max) cfg.scan_max_nm = *scan_max;
    if (!(cfg.dt > 0) || !(cfg.tolerance_nm > 0) || !(cfg.scan_max_nm > 0))
        throw ValidationError("--dt, --tolerance-nm and --scan-max-nm must be positive");
    return cfg;
}

struct DatasetInfo {
    std::string sam_id;
    Sector sector;
};

DatasetInfo read_sidecar(const fs::path& csv) {
    const fs::path meta = sidecar_path(csv);
    if (!fs::exists(meta)) throw ArtifactError("missing dataset sidecar " + meta.string());
    try {
        const Json j = Json::parse(read_file(meta));
        return {j.at("sam_id").get<std::string>(), parse_sector(j.at("sector").get<std::string>())};
    } catch (const Json::exception& e) {
        throw ArtifactError("dataset sidecar " + meta.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ArtifactError("dataset sidecar " + meta.string() + ": " + e.what());
    }
}

std::vector<EngagementQuery> read_queries_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("queries CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("alt_ft,speed_kt,aspect_deg", 0) != 0)
        throw ArtifactError("queries CSV: header must start with alt_ft,speed_kt,aspect_deg");
    std::vector<EngagementQuery> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, s, g;
        if (!std::getline(ls, a, ',') || !std::getline(ls, s, ',') || !std::getline(ls, g, ','))
            throw ArtifactError("queries CSV line " + std::to_string(line_no) + ": expected 3 fields");
        try {
            out.push_back({std::stod(a), std::stod(s), std::stod(g)});
        } catch (const std::exception&) {
            throw ArtifactError("queries CSV line " + std::to_string(line_no) + ": not a number");
        }
    }
    return out;
}

/// A single model or a composed multimodel behind one predict interface.
struct Predictor {
    std::optional<TrainedModel> model;
    std::optional<Multimodel> multi;

    static Predictor open(const std::string& manifest, const std::string& model_path) {
        Predictor p;
        if (!manifest.empty()) p.multi.emplace(Multimodel::load(manifest));
        else p.model.emplace(load_model(model_path));
        return p;
    }
    std::vector<double> batch(std::span<const EngagementQuery> q) const {
        return multi ? multi->predict_batch(q) : model->predict_batch(q);
    }
};

std::vector<double> aspect_sweep(double step) {
    if (!(step > 0)) throw ValidationError("--step-deg must be positive");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor(180.0 / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(std::min(180.0, static_cast<double>(i) * step));
    if (out.back() < 180.0) out.push_back(180.0);
    return out;
}

// ---- subcommands ---------------------------------------------------------------------------

struct QueryFlags {
    double alt_ft = 0, speed_kt = 0, aspect_deg = 0;
    EngagementQuery query() const { return {alt_ft, speed_kt, aspect_deg}; }
    void add(CLI::App* app, bool required = true) {
        auto* a = app->add_option("--alt-ft", alt_ft, "Target elevation above the launcher (ft)");
        auto* s = app->add_option("--speed-kt", speed_kt, "Target true airspeed (kt)");
        auto* g = app->add_option("--aspect-deg", aspect_deg, "Target aspect (deg, 180 = head-on)");
        if (required) {
            a->required();
            s->required();
            g->required();
        }
    }
};

struct SimArgs {
    std::string sam;
    QueryFlags q;
    double range_nm = 0;
    std::optional<double> dt;
    std::string trace;
    bool force = false;
};

int cmd_sim(const SimArgs& a, std::ostream& out) {
    const MissileParams sam = resolve_params(a.sam);
    const EngagementQuery q = a.q.query();
    validate_query(q);
    if (!(a.range_nm > 0)) throw ValidationError("--range-nm must be positive");
    const double dt = a.dt.value_or(kDefaultDt);
    if (!(dt > 0)) throw ValidationError("--dt must be positive");
    std::vector<TraceRow> trace;
    const EngagementOutcome o =
        simulate_shot(q, units::nm_to_m(a.range_nm), sam, dt, a.trace.empty() ? nullptr : &trace);
    if (!a.trace.empty()) {
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        write_output(a.trace, csv.str(), a.force);
    }
    Json j;
    j["sam_id"] = sam.name;
    j["query"] = query_json(q);
    j["range_nm"] = a.range_nm;
    j["dt"] = dt;
    j["result"] = std::string(to_string(o.result));
    j["miss_distance_m"] = o.miss_distance;
    j["time_of_flight_s"] = o.time_of_flight;
    j["termination_reason"] = std::string(to_string(o.termination_reason));
    j["steps"] = o.steps;
    out << j.dump(2) << '\n';
    return kOk;
}

struct EnvelopeArgs {
    std::string sam;
    QueryFlags q;
    std::optional<double> dt, tolerance, scan_max;
};

int cmd_envelope(const EnvelopeArgs& a, std::ostream& out) {
    const MissileParams sam = resolve_params(a.sam);
    const EngagementQuery q = a.q.query();
    validate_query(q);
    const SolverConfig cfg = solver_for(sam, a.dt, a.tolerance, a.scan_max);
    const MaxRangeResult r = solve_max_range(q, sam, cfg);
    Json j;
    j["sam_id"] = sam.name;
    j["query"] = query_json(q);
    j["max_range_nm"] = r.max_range_nm;
    j["status"] = std::string(to_string(r.status));
    j["bracket_lo_nm"] = r.bracket_lo_nm;
    j["bracket_hi_nm"] = r.bracket_hi_nm;
    j["engagements_run"] = r.engagements_run;
    j["bisection_iterations"] = r.bisection_iterations;
    j["solver"] = {{"scan_max_nm", cfg.scan_max_nm},
                   {"scan_step_nm", cfg.scan_step_nm},
                   {"tolerance_nm", cfg.tolerance_nm},
                   {"fine_step_nm", cfg.fine_step_nm},
                   {"dt", cfg.dt}};
    out << j.dump(2) << '\n';
    return kOk;
}

struct DatasetArgs {
    std::string sam, sector, out;
    std::size_t n = 600;
    std::uint64_t seed = 1;
    int workers = 0;
    std::optional<double> dt, tolerance, scan_max;
    std::vector<std::string> from;
    bool force = false;
};

int cmd_dataset(const DatasetArgs& a, std::ostream& out) {
    const Sector sector = parse_sector(a.sector);
    const fs::path csv_path = a.out;
    if (!a.from.empty()) {
        if (!sector.is_whole()) throw ValidationError("--from merges sector files and requires --sector whole");
        std::vector<Dataset> parts;
        Json sources = Json::array();
        Json solver;
        for (const std::string& f : a.from) {
            const DatasetInfo info = read_sidecar(f);
            const Json meta = Json::parse(read_file(sidecar_path(f)));
            Dataset d;
            d.rows = read_dataset_csv(f);
            d.sam_id = info.sam_id;
            d.sector = info.sector;
            d.seed = meta.at("seed").get<std::uint64_t>();
            const Json& c = meta.at("counts");
            d.counts = {c.at("requested").get<std::size_t>(), c.at("solved").get<std::size_t>(),
                        c.at("redraws").get<std::size_t>(), c.at("sentinel").get<std::size_t>(),
                        c.at("engagements_run").get<std::size_t>()};
            if (solver.is_null()) solver = meta.at("solver");
            else if (solver != meta.at("solver")) throw ValidationError("--from files were solved with different settings");
            sources.push_back({{"path", fs::path(f).filename().string()}, {"sha256", sha256_file(f)}});
            parts.push_back(std::move(d));
        }
        std::sort(parts.begin(), parts.end(),
                  [](const Dataset& x, const Dataset& y) { return x.sector.id < y.sector.id; });
        for (std::size_t i = 1; i < parts.size(); ++i)
            if (parts[i].sector.id == parts[i - 1].sector.id)
                throw ValidationError("--from lists sector " + sector_token(parts[i].sector) + " twice");
        const Dataset merged = merge_sectors(parts);
        const std::string csv = dataset_csv(merged.rows);
        const std::string digest = sha256_hex(csv);
        Json meta = Json::parse(dataset_sidecar_json(merged, GenerationConfig{}, digest));
        meta["solver"] = solver;
        meta["merged_from"] = sources;
        write_output(csv_path, csv, a.force);
        write_output(sidecar_path(csv_path), meta.dump(2) + "\n", a.force);
        out << "wrote " << csv_path.string() << " (" << merged.rows.size() << " rows merged from " << parts.size()
            << " sectors, sha256 " << digest << ")\n";
        return kOk;
    }
    if (a.n == 0) throw ValidationError("--n must be positive");
    const MissileParams sam = resolve_params(a.sam);
    GenerationConfig cfg;
    cfg.solver = solver_for(sam, a.dt, a.tolerance, a.scan_max);
    cfg.workers = a.workers;
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = generate_dataset(sam, sector, a.n, a.seed, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string csv = dataset_csv(ds.rows);
    const std::string digest = sha256_hex(csv);
    write_output(csv_path, csv, a.force);
    write_output(sidecar_path(csv_path), dataset_sidecar_json(ds, cfg, digest), a.force);
    out << "wrote " << csv_path.string() << " (" << ds.counts.solved << " solved, " << ds.counts.sentinel
        << " without engagement, " << ds.counts.redraws << " redraws, " << ds.counts.engagements_run
        << " engagements in " << secs << " s, sha256 " << digest << ")\n";
    return kOk;
}

struct TrainArgs {
    std::string dataset, method = "all", out_dir;
    std::uint64_t seed = 1;
    int workers = 0;
    int folds = 5;
    std::optional<int> max_epochs;
    bool force = false;
};

std::string cv_csv(const CvReport& r) {
    std::string s = "config,rmse_mean_nm,rmse_std_nm,mape_mean_pct,mape_std_pct,r2_mean,r2_std,selected\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        const CvScores& c = r.scores[i];
        s += r.grid[i].label() + ',' + format_double(c.rmse_nm.mean) + ',' + format_double(c.rmse_nm.std) + ',' +
             format_double(c.mape_pct.mean) + ',' + format_double(c.mape_pct.std) + ',' +
             format_double(c.r2.mean) + ',' + format_double(c.r2.std) + ',' + (i == r.best ? "1" : "0") + '\n';
    }
    return s;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
    std::vector<Method> methods;
    if (a.method == "all") methods.assign(kMethods.begin(), kMethods.end());
    else methods.push_back(parse_method(a.method));
    if (a.max_epochs && *a.max_epochs < 1) throw ValidationError("--max-epochs must be >= 1");

    const DatasetInfo info = read_sidecar(a.dataset);
    std::vector<Sample> solved;
    for (const Sample& s : read_dataset_csv(a.dataset))
        if (s.max_range_nm > 0) solved.push_back(s);
    if (solved.size() < 10) throw ArtifactError("dataset " + a.dataset + " has too few solved rows to train on");

    const Split split = split_train_test(solved, kTrainRatio, derive_seed(a.seed, {kSplitTag}));
    const fs::path dir = a.out_dir;
    const std::string stem = info.sam_id + "_" + sector_token(info.sector);
    const fs::path train_path = dir / (stem + "_train.csv");
    const fs::path test_path = dir / (stem + "_test.csv");
    const std::string train_csv = dataset_csv(split.train);
    const std::string test_csv = dataset_csv(split.test);
    write_output(train_path, train_csv, a.force);
    write_output(test_path, test_csv, a.force);

    for (Method m : methods) {
        GridSearchConfig cfg;
        cfg.folds = a.folds;
        cfg.workers = a.workers;
        cfg.grid = default_grid(m);
        if (a.max_epochs)
            for (HyperChoice& c : cfg.grid) c.mlp.max_epochs = *a.max_epochs;
        const auto t0 = std::chrono::steady_clock::now();
        GridSearchResult r = grid_search(m, split.train, a.seed, cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        TrainedModel& model = r.model;
        model.sam_id = info.sam_id;
        model.sector = info.sector;
        model.meta.train_sha256 = sha256_hex(train_csv);
        model.meta.test_sha256 = sha256_hex(test_csv);
        model.meta.test_path = test_path.filename().string();
        const fs::path model_path = dir / model_filename(info.sam_id, info.sector, m);
        fs::path cv_path = model_path;
        cv_path.replace_extension(".cv.csv");
        write_output(model_path, model_to_json(model), a.force);
        write_output(cv_path, cv_csv(r.report), a.force);
        out << sector_label(info.sector) << ' ' << to_string(m) << ": " << r.best.label() << ", CV RMSE "
            << r.report.rmse_text(r.report.best) << ", CV MAPE " << r.report.mape_text(r.report.best) << " ("
            << split.train.size() << " train rows, " << secs << " s) -> " << model_path.string() << '\n';
    }
    return kOk;
}

struct EvalArgs {
    std::vector<std::string> models;
    std::string model_dir, sam, test, out, table;
    bool force = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    std::vector<fs::path> paths(a.models.begin(), a.models.end());
    if (!a.model_dir.empty()) {
        if (!fs::is_directory(a.model_dir)) throw ArtifactError("no model directory " + a.model_dir);
        for (const auto& e : fs::directory_iterator(a.model_dir)) {
            const std::string name = e.path().filename().string();
            const bool is_model = name.ends_with("_pr.json") || name.ends_with("_ann.json") || name.ends_with("_rfr.json");
            if (is_model && (a.sam.empty() || name.rfind(a.sam + "_", 0) == 0)) paths.push_back(e.path());
        }
        std::sort(paths.begin(), paths.end());
    }
    if (paths.empty()) throw ValidationError("eval needs --models or --model-dir");
    if (!a.test.empty() && paths.size() != 1) throw ValidationError("--test applies to a single model");

    std::vector<MetricsRow> rows;
    for (const fs::path& p : paths) {
        const TrainedModel model = load_model(p);
        const fs::path test = a.test.empty() ? p.parent_path() / model.meta.test_path : fs::path(a.test);
        const std::string digest = sha256_file(test);
        if (digest != model.meta.test_sha256)
            throw ArtifactError("test set " + test.string() + " does not match the split recorded in " +
                                p.string() + " (sha256 " + digest + ", expected " + model.meta.test_sha256 + ")");
        if (digest == model.meta.train_sha256)
            throw ArtifactError("test set " + test.string() + " is the training split of " + p.string());
        rows.push_back(evaluate_model(model, read_dataset_csv(test)));
    }
    const Report report = build_report(std::move(rows));
    write_output(a.out, report_csv(report), a.force);
    const std::string table = render_report_table(report);
    if (!a.table.empty()) write_output(a.table, table, a.force);
    out << table;
    return kOk;
}

struct ComposeArgs {
    std::string report, policy = "accuracy", model_dir, out;
    double eps_rmse = 0.2, eps_mape = 0.2, rmse_cap = 1.0;
    bool force = false;
};

int cmd_compose(const ComposeArgs& a, std::ostream& out) {
    const PolicyKind kind = parse_policy(a.policy);
    const Report report = read_report_csv(a.report);
    if (!report.complete())
        throw ArtifactError("report " + a.report + " must hold all 18 (sample set, method) rows");
    CompositionPlan plan =
        kind == PolicyKind::Accuracy ? compose_accuracy(report, a.eps_rmse, a.eps_mape) : compose_speed(report, a.rmse_cap);
    const fs::path manifest = fs::absolute(a.out);
    fs::path models_dir = a.model_dir.empty() ? fs::path(a.report).parent_path() : fs::path(a.model_dir);
    if (models_dir.empty()) models_dir = ".";
    const fs::path models = fs::absolute(models_dir);
    for (Assignment& as : plan.assignments) {
        const fs::path target = models / as.model_path;
        if (!fs::exists(target)) throw ArtifactError("composition references missing model " + target.string());
        as.model_path = fs::relative(target, manifest.parent_path()).generic_string();
    }
    write_output(a.out, plan_to_json(plan), a.force);
    out << to_string(plan.kind) << " multimodel for " << plan.sam_id << " (" << to_string(kind) << " policy):\n";
    for (const Assignment& as : plan.assignments)
        out << "  " << sector_label(as.sector) << " -> " << to_string(as.method) << " (" << as.model_path << ")\n";
    return kOk;
}

struct PredictArgs {
    std::string manifest, model, queries, out;
    QueryFlags q;
    bool force = false;
};

int cmd_predict(const PredictArgs& a, CLI::App* sub, std::ostream& out, std::ostream& err) {
    const Predictor p = Predictor::open(a.manifest, a.model);
    std::vector<EngagementQuery> queries;
    if (!a.queries.empty()) queries = read_queries_csv(a.queries);
    else if (sub->count("--alt-ft") && sub->count("--speed-kt") && sub->count("--aspect-deg"))
        queries.push_back(a.q.query());
    else throw ValidationError("predict needs --queries or all of --alt-ft, --speed-kt, --aspect-deg");
    if (queries.empty()) throw ArtifactError("no queries in " + a.queries);
    for (const EngagementQuery& q : queries)
        if (!std::isfinite(q.aspect_deg) || q.aspect_deg < 0 || q.aspect_deg > 180)
            throw ValidationError("aspect_deg must lie in [0, 180]");

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> pred = p.batch(queries);
    const double pt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t outside = 0;
    std::string csv = "alt_ft,speed_kt,aspect_deg,pred_max_range_nm\n";
    for (std::size_t i = 0; i < queries.size(); ++i) {
        outside += in_box(queries[i]) ? 0 : 1;
        csv += format_double(queries[i].elevation_ft) + ',' + format_double(queries[i].speed_kt) + ',' +
               format_double(queries[i].aspect_deg) + ',' + format_double(pred[i]) + '\n';
    }
    std::ostream& summary = a.out.empty() ? err : out;
    if (a.out.empty()) out << csv;
    else write_output(a.out, csv, a.force);
    summary << queries.size() << " predictions in " << pt << " s (" << pt / static_cast<double>(queries.size())
            << " s per shot)\n";
    if (outside) summary << "warning: " << outside << " queries outside the input box (extrapolated)\n";
    return kOk;
}

struct PlotArgs {
    std::string manifest, model, sam, out;
    double alt_ft = 0, speed_kt = 0, step_deg = 5;
    std::optional<double> dt, tolerance, scan_max;
    int workers = 0;
    bool force = false;
};

int cmd_plotdata(const PlotArgs& a, std::ostream& out) {
    if (a.sam.empty() && a.manifest.empty() && a.model.empty())
        throw ValidationError("plotdata needs --sam and/or one of --manifest, --model");
    const std::vector<double> aspects = aspect_sweep(a.step_deg);
    std::vector<EngagementQuery> queries;
    for (double g : aspects) {
        queries.push_back({a.alt_ft, a.speed_kt, g});
        validate_query(queries.back());
    }
    std::vector<double> sim;
    if (!a.sam.empty()) {
        const MissileParams sam = resolve_params(a.sam);
        const SolverConfig cfg = solver_for(sam, a.dt, a.tolerance, a.scan_max);
        sim.resize(queries.size());
        parallel_for(queries.size(), a.workers,
                     [&](std::size_t i) { sim[i] = solve_max_range(queries[i], sam, cfg).max_range_nm; });
    }
    std::vector<double> surrogate;
    if (!a.manifest.empty() || !a.model.empty()) surrogate = Predictor::open(a.manifest, a.model).batch(queries);

    std::string csv = "aspect_deg,max_range_nm,source\n";
    for (std::size_t i = 0; i < aspects.size(); ++i) {
        if (!sim.empty()) csv += format_double(aspects[i]) + ',' + format_double(sim[i]) + ",sim\n";
        if (!surrogate.empty()) csv += format_double(aspects[i]) + ',' + format_double(surrogate[i]) + ",surrogate\n";
    }
    if (a.out.empty()) out << csv;
    else write_output(a.out, csv, a.force);
    return kOk;
}

void add_solver_flags(CLI::App* app, std::optional<double>& dt, std::optional<double>& tol,
                      std::optional<double>& scan_max) {
    app->add_option("--dt", dt, "Integration step (s)");
    app->add_option("--tolerance-nm", tol, "Bisection tolerance (nm)");
    app->add_option("--scan-max-nm", scan_max, "Outermost ground range scanned (nm)");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Missile engagement-zone simulation, datasets, surrogates and multimodels", "ezone"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    SimArgs sim;
    auto* s_sim = app.add_subcommand("sim", "Fly one shot and print the outcome as JSON");
    s_sim->add_option("--sam", sim.sam, "Preset (sam_a, sam_b) or params file")->required();
    sim.q.add(s_sim);
    s_sim->add_option("--range-nm", sim.range_nm, "Initial ground range (nm)")->required();
    s_sim->add_option("--dt", sim.dt, "Integration step (s)");
    s_sim->add_option("--trace", sim.trace, "Write the per-step trajectory CSV here");
    s_sim->add_flag("--force", sim.force, "Overwrite existing outputs");

    EnvelopeArgs env;
    auto* s_env = app.add_subcommand("envelope", "Solve the maximum launch range for one condition");
    s_env->add_option("--sam", env.sam, "Preset (sam_a, sam_b) or params file")->required();
    env.q.add(s_env);
    add_solver_flags(s_env, env.dt, env.tolerance, env.scan_max);

    DatasetArgs ds;
    auto* s_ds = app.add_subcommand("dataset", "Generate an LHS max-range dataset for one sample set");
    s_ds->add_option("--sam", ds.sam, "Preset (sam_a, sam_b) or params file");
    s_ds->add_option("--sector", ds.sector, "s0..s4 or whole")->required();
    s_ds->add_option("--n", ds.n, "Sample count")->capture_default_str();
    s_ds->add_option("--seed", ds.seed, "Master seed")->capture_default_str();
    s_ds->add_option("--out", ds.out, "Output CSV (sidecar written next to it)")->required();
    s_ds->add_option("--workers", ds.workers, "Worker threads (0 = all cores)");
    s_ds->add_option("--from", ds.from, "Sector CSVs to merge into the whole set");
    add_solver_flags(s_ds, ds.dt, ds.tolerance, ds.scan_max);
    s_ds->add_flag("--force", ds.force, "Overwrite existing outputs");

    TrainArgs tr;
    auto* s_tr = app.add_subcommand("train", "Split a dataset 80/20 and grid-search surrogate models");
    s_tr->add_option("--dataset", tr.dataset, "Dataset CSV with its sidecar")->required()->check(CLI::ExistingFile);
    s_tr->add_option("--method", tr.method, "PR, ANN, RFR or all")->capture_default_str();
    s_tr->add_option("--seed", tr.seed, "Master seed for split, folds and fitting")->capture_default_str();
    s_tr->add_option("--out", tr.out_dir, "Output directory")->required();
    s_tr->add_option("--workers", tr.workers, "Worker threads (0 = all cores)");
    s_tr->add_option("--folds", tr.folds, "Cross-validation folds")->capture_default_str();
    s_tr->add_option("--max-epochs", tr.max_epochs, "Cap on ANN epochs");
    s_tr->add_flag("--force", tr.force, "Overwrite existing outputs");

    EvalArgs ev;
    auto* s_ev = app.add_subcommand("eval", "Evaluate models on their recorded test splits");
    s_ev->add_option("--models", ev.models, "Model JSON files");
    s_ev->add_option("--model-dir", ev.model_dir, "Evaluate every model JSON in this directory");
    s_ev->add_option("--sam", ev.sam, "With --model-dir, only models of this archetype");
    s_ev->add_option("--test", ev.test, "Test CSV to use instead of the recorded path (hash still checked)");
    s_ev->add_option("--out", ev.out, "Report CSV")->required();
    s_ev->add_option("--table", ev.table, "Also write the rendered table here");
    s_ev->add_flag("--force", ev.force, "Overwrite existing outputs");

    ComposeArgs co;
    auto* s_co = app.add_subcommand("compose", "Compose a multimodel from an evaluation report");
    s_co->add_option("--report", co.report, "Report CSV")->required();
    s_co->add_option("--policy", co.policy, "accuracy or speed")->capture_default_str();
    s_co->add_option("--eps-rmse", co.eps_rmse, "Accuracy policy RMSE slack (nm)")->capture_default_str();
    s_co->add_option("--eps-mape", co.eps_mape, "Accuracy policy MAPE slack (percentage points)")->capture_default_str();
    s_co->add_option("--rmse-cap", co.rmse_cap, "Speed policy RMSE cap (nm)")->capture_default_str();
    s_co->add_option("--model-dir", co.model_dir, "Directory holding the models (default: report's directory)");
    s_co->add_option("--out", co.out, "Manifest JSON")->required();
    s_co->add_flag("--force", co.force, "Overwrite existing outputs");

    PredictArgs pr;
    auto* s_pr = app.add_subcommand("predict", "Predict max range with a model or multimodel");
    auto* pr_manifest = s_pr->add_option("--manifest", pr.manifest, "Multimodel manifest");
    auto* pr_model = s_pr->add_option("--model", pr.model, "Single model JSON");
    pr_manifest->excludes(pr_model);
    s_pr->add_option("--queries", pr.queries, "CSV starting with alt_ft,speed_kt,aspect_deg");
    pr.q.add(s_pr, false);
    s_pr->add_option("--out", pr.out, "Predictions CSV (default: stdout)");
    s_pr->add_flag("--force", pr.force, "Overwrite existing outputs");

    PlotArgs pl;
    auto* s_pl = app.add_subcommand("plotdata", "Sweep aspect at fixed altitude and speed");
    auto* pl_manifest = s_pl->add_option("--manifest", pl.manifest, "Multimodel manifest");
    auto* pl_model = s_pl->add_option("--model", pl.model, "Single model JSON");
    pl_manifest->excludes(pl_model);
    s_pl->add_option("--sam", pl.sam, "Also solve the simulator at each aspect");
    s_pl->add_option("--alt-ft", pl.alt_ft, "Target elevation (ft)")->required();
    s_pl->add_option("--speed-kt", pl.speed_kt, "Target speed (kt)")->required();
    s_pl->add_option("--step-deg", pl.step_deg, "Aspect step (deg)")->capture_default_str();
    s_pl->add_option("--workers", pl.workers, "Worker threads for the simulator sweep");
    add_solver_flags(s_pl, pl.dt, pl.tolerance, pl.scan_max);
    s_pl->add_option("--out", pl.out, "Output CSV (default: stdout)");
    s_pl->add_flag("--force", pl.force, "Overwrite existing outputs");

    std::vector<const char*> argv{"ezone"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (s_sim->parsed()) return cmd_sim(sim, out);
        if (s_env->parsed()) return cmd_envelope(env, out);
        if (s_ds->parsed()) {
            if (ds.from.empty() && ds.sam.empty()) throw ValidationError("dataset needs --sam (or --from to merge)");
            return cmd_dataset(ds, out);
        }
        if (s_tr->parsed()) return cmd_train(tr, out);
        if (s_ev->parsed()) return cmd_eval(ev, out);
        if (s_co->parsed()) return cmd_compose(co, out);
        if (s_pr->parsed()) {
            if (pr.manifest.empty() && pr.model.empty()) throw ValidationError("predict needs --manifest or --model");
            return cmd_predict(pr, s_pr, out, err);
        }
        if (s_pl->parsed()) return cmd_plotdata(pl, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ArtifactError& e) {
        err << "error: " << e.what() << '\n';
        return kArtifact;
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return kInfeasible;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kDivergence;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << '\n';
        return kArtifact;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

} // namespace ez::cli
