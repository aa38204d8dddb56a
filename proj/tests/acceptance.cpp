// Acceptance runner: one PASS/FAIL line per criterion, selected with --criterion N.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "golden_reports.hpp"
#include "oracles.hpp"

#include "cli.hpp"
#include "ez/evaluation.hpp"
#include "ez/multimodel.hpp"
#include "ez/parallel.hpp"
#include "ez/training.hpp"

namespace fs = std::filesystem;
using namespace ez;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

bool rel_close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int ezone(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) *out = o.str();
    if (code != 0) {
        std::cerr << "ezone";
        for (const auto& a : args) std::cerr << ' ' << a;
        std::cerr << "\n  exit " << code << ": " << e.str();
    }
    return code;
}

// Metric exactness against hand values and an in-test percentage-error oracle.
void criterion_1(Verdict& v) {
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> p{1, 2, 4};
    v.require(rel_close(rmse(y, p), std::sqrt(1.0 / 3.0), 1e-12), "rmse hand value");
    v.require(rel_close(mape(y, p), 100.0 / 9.0, 1e-12), "mape hand value");
    v.require(rel_close(r2(y, p), 0.5, 1e-12), "r2 hand value");
    v.require(rel_close(percentage_error(4, 5), 25.0, 1e-12), "percentage error hand value");

    Rng rng(20240611);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double yt = rng.uniform(0.5, 120.0);
        const double yh = rng.uniform(0.0, 150.0);
        const double k = std::exp(rng.uniform(-6.0, 6.0));
        const double base = percentage_error(yt, yh);
        const double oracle_pe = 100.0 * std::abs(yh - yt) / yt;
        const double scaled = percentage_error(k * yt, k * yh);
        if (base > 0) worst = std::max({worst, std::abs(scaled - base) / base, std::abs(oracle_pe - base) / base});
        else v.require(scaled == 0.0, "scale invariance at zero error");
    }
    v.require(worst <= 1e-12, "scale invariance within 1e-12");
    v.detail << "rmse=" << rmse(y, p) << " mape=" << mape(y, p) << "% worst scale-invariance rel err=" << worst
             << " over 1000 triples";
}

void criterion_2(Verdict& v) {
    const CompositionPlan a_acc = compose_accuracy(golden::report_a(), 0.2, 0.2);
    bool het = a_acc.kind == PlanKind::Heterogeneous && a_acc.assignments.size() == 5 &&
               a_acc.assignments[0].method == Method::PR;
    for (std::size_t i = 1; het && i < 5; ++i) het = a_acc.assignments[i].method == Method::ANN;
    v.require(het, "first archetype accuracy plan is PR on [0,144) and ANN elsewhere");

    const CompositionPlan b_acc = compose_accuracy(golden::report_b(), 0.2, 0.2);
    v.require(b_acc.kind == PlanKind::Single && b_acc.assignments.size() == 1 &&
                  b_acc.assignments[0].method == Method::RFR && b_acc.assignments[0].sector.is_whole(),
              "second archetype accuracy plan is a single whole RFR model");

    const CompositionPlan a_spd = compose_speed(golden::report_a(), 1.0);
    bool homo = a_spd.kind == PlanKind::Homogeneous && a_spd.assignments.size() == 5;
    for (const Assignment& x : a_spd.assignments) homo = homo && x.method == Method::RFR;
    v.require(homo, "first archetype speed plan is five RFR sectors");

    const CompositionPlan b_spd = compose_speed(golden::report_b(), 1.0);
    v.require(b_spd.kind == PlanKind::Single && b_spd.assignments[0].sector.is_whole(),
              "second archetype speed plan is a single whole model");

    v.detail << "accuracy: " << to_string(a_acc.kind) << " / " << to_string(b_acc.kind) << " "
             << to_string(b_acc.assignments[0].method) << "; speed: " << to_string(a_spd.kind) << " / "
             << to_string(b_spd.kind) << " " << to_string(b_spd.assignments[0].method);
}

void criterion_3(Verdict& v) {
    const std::array<Interval, 3> box{{{-5000, 45000}, {200, 850}, {0, 180}}};
    std::size_t checked = 0;
    for (std::size_t n : {1u, 5u, 50u, 500u}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto pts = lhs(n, box, seed);
            v.require(pts.size() == n, "sample count");
            for (std::size_t d = 0; d < 3; ++d) {
                std::vector<double> col;
                for (const Point3& x : pts) col.push_back((x[d] - box[d].lo) / (box[d].hi - box[d].lo));
                std::sort(col.begin(), col.end());
                // Sorted, the i-th value must sit in stratum i.
                bool ok = true;
                for (std::size_t i = 0; i < n; ++i)
                    ok = ok && col[i] >= static_cast<double>(i) / n && col[i] < static_cast<double>(i + 1) / n;
                if (!ok) v.require(false, "n=" + std::to_string(n) + " seed=" + std::to_string(seed));
                ++checked;
            }
        }
    }
    v.detail << checked << " (n, seed, dimension) columns checked";
}

void criterion_4(Verdict& v) {
    std::uint64_t stream = 0;
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        SolverConfig cfg = default_solver_config(p);
        cfg.dt = 0.02;
        Rng rng(derive_seed(4, {++stream}));
        std::vector<EngagementQuery> queries;
        for (int i = 0; i < 50; ++i)
            queries.push_back({rng.uniform(-5000, 45000), rng.uniform(200, 850), rng.uniform(0, 180)});

        struct Row {
            MaxRangeResult solve, brute;
            bool boundary_ok = true;
        };
        std::vector<Row> rows(queries.size());
        parallel_for(queries.size(), 0, [&](std::size_t i) {
            Row& r = rows[i];
            r.solve = solve_max_range(queries[i], p, cfg);
            r.brute = brute_force_scan(queries[i], p, 0.1, cfg);
            if (r.solve.status == SolveStatus::Solved) {
                const double R = r.solve.max_range_nm;
                r.boundary_ok = hits_at(queries[i], R - cfg.tolerance_nm, p, cfg.dt) &&
                                !hits_at(queries[i], R + cfg.tolerance_nm, p, cfg.dt);
            }
        });
        double worst = 0;
        int solved = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            std::ostringstream q;
            q << p.name << " query " << i << " (" << queries[i].elevation_ft << " ft, " << queries[i].speed_kt
              << " kt, " << queries[i].aspect_deg << " deg)";
            v.require(r.solve.status == r.brute.status, q.str() + " status disagrees");
            if (r.solve.status != SolveStatus::Solved) continue;
            ++solved;
            const double diff = std::abs(r.solve.max_range_nm - r.brute.max_range_nm);
            worst = std::max(worst, diff);
            if (diff > 0.1 + 1e-9) {
                std::ostringstream m;
                m << q.str() << " solve " << r.solve.max_range_nm << " vs brute " << r.brute.max_range_nm;
                v.require(false, m.str());
            }
            v.require(r.boundary_ok, q.str() + " boundary consistency");
        }
        v.detail << p.name << ": " << solved << "/50 solved, worst |solve-brute| " << worst << " nm; ";
    }
}

void criterion_5(Verdict& v) {
    const MissileParams a = sam_a();

    MissileState s;
    s.velocity = Vec3(300, 40, 500);
    s.position = Vec3(10, -5, 100);
    s.mass = a.launch_mass;
    const MissileState end = oracle::coast(s, a, 0.01, 30.0, ForceModel{false, false});
    const Vec3 ref = oracle::ballistic(s.position, s.velocity, 30.0);
    double worst_vac = 0;
    for (int i = 0; i < 3; ++i) worst_vac = std::max(worst_vac, std::abs(end.position[i] - ref[i]) / std::abs(ref[i]));
    v.require(worst_vac <= 1e-3, "vacuum trajectory within 0.1%");

    MissileState c;
    c.position = Vec3(0, 0, 8000);
    c.velocity = Vec3(640, 0, 60);
    c.time = 30.0;
    c.mass = a.burnout_mass();
    const ForceModel drag_only{false, true};
    const double order = oracle::observed_order(oracle::coast(c, a, 0.5, 5.0, drag_only).position,
                                                oracle::coast(c, a, 0.25, 5.0, drag_only).position,
                                                oracle::coast(c, a, 0.125, 5.0, drag_only).position);
    v.require(order >= 3.5, "observed order >= 3.5");

    bool energy_ok = true;
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        MissileState e;
        e.position = Vec3(0, 0, 3000);
        e.velocity = Vec3(900, 0, 250);
        e.time = p.burn_end_time() + 0.5;
        e.mass = p.burnout_mass();
        double prev = oracle::specific_energy(e);
        for (int i = 0; i < 4000 && e.position.z() > -1000; ++i) {
            e = rk4_step(e, Vec3::Zero(), p, 0.01);
            const double now = oracle::specific_energy(e);
            energy_ok = energy_ok && now <= prev + 1e-9 * std::abs(prev);
            prev = now;
        }
    }
    v.require(energy_ok, "post-burnout energy non-increasing");

    // Full command chain (phase, law, limiter) on random geometries.
    Rng rng(5);
    double worst_dot = 0, worst_ratio = 0;
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        const double limit = p.g_limit * kGravity;
        for (int i = 0; i < 20000; ++i) {
            MissileState m;
            m.position = Vec3(rng.uniform(-2e4, 2e4), rng.uniform(-2e4, 2e4), rng.uniform(0, 1.5e4));
            m.velocity = Vec3(rng.uniform(-1200, 1200), rng.uniform(-1200, 1200), rng.uniform(-600, 600));
            m.time = rng.uniform(0, p.max_flight_time);
            m.mass = thrust_and_mass(m.time, p).mass;
            TargetTrack t;
            t.position = Vec3(rng.uniform(-1e5, 1e5), rng.uniform(-1e5, 1e5), rng.uniform(0, 1.4e4));
            t.velocity = Vec3(rng.uniform(-440, 440), rng.uniform(-440, 440), 0);
            const LosKinematics los = los_kinematics(m, t);
            const auto prior = static_cast<GuidancePhase>(rng.below(3));
            const GuidancePhase phase = select_phase(m, los, p, prior);
            const Vec3 raw = phase == GuidancePhase::Loft ? loft_command(m, p) : pn_command(los, p.nav_constant);
            const Vec3 cmd = limit_command(raw, m, p);
            const double vn = m.velocity.norm();
            if (vn > 0 && cmd.norm() > 0) worst_dot = std::max(worst_dot, std::abs(cmd.dot(m.velocity)) / (vn * cmd.norm()));
            worst_ratio = std::max(worst_ratio, cmd.norm() / limit);
        }
    }
    v.require(worst_dot <= 1e-9, "command perpendicular to velocity");
    v.require(worst_ratio <= 1.0 + 1e-12, "command within g limit");
    v.detail << "vacuum rel err " << worst_vac << ", observed order " << order << ", energy "
             << (energy_ok ? "non-increasing" : "rose") << ", max |cos(cmd,v)| " << worst_dot
             << ", max |cmd|/limit " << worst_ratio;
}

void criterion_6(Verdict& v) {
    const double small = oracle::mlp_gradient_error(2, 32, 17);
    const double large = oracle::mlp_gradient_error(5, 64, 23);
    v.require(small < 1e-4, "2x32 gradient");
    v.require(large < 1e-4, "5x64 gradient");
    v.detail << "max relative error 2x32 " << small << ", 5x64 " << large;
}

// Desk-scale pipeline through the CLI: 600 rows per sample set, all three methods.
void criterion_7(Verdict& v, const fs::path& work) {
    const fs::path dir = work / "end_to_end";
    fs::remove_all(dir);
    for (const char* sam : {"sam_a", "sam_b"}) {
        const fs::path models = dir / sam;
        for (const Sector& s : all_sample_sets()) {
            const std::string csv = (dir / "data" / (std::string(sam) + "_" + sector_token(s) + ".csv")).string();
            const auto t0 = std::chrono::steady_clock::now();
            if (ezone({"dataset", "--sam", sam, "--sector", sector_token(s), "--n", "600", "--seed", "7", "--dt", "0.02",
                       "--out", csv}) != 0) {
                v.require(false, std::string("dataset ") + sam + " " + sector_token(s));
                return;
            }
            const double gen = seconds_since(t0);
            const auto t1 = std::chrono::steady_clock::now();
            if (ezone({"train", "--dataset", csv, "--seed", "7", "--out", models.string()}) != 0) {
                v.require(false, std::string("train ") + sam + " " + sector_token(s));
                return;
            }
            std::cerr << sam << ' ' << sector_token(s) << ": generated in " << gen << " s, trained in "
                      << seconds_since(t1) << " s\n";
        }
        const fs::path report_path = dir / (std::string(sam) + "_report.csv");
        std::string table;
        if (ezone({"eval", "--model-dir", models.string(), "--sam", sam, "--out", report_path.string(), "--table",
                   (dir / (std::string(sam) + "_table.txt")).string()},
                  &table) != 0) {
            v.require(false, std::string("eval ") + sam);
            return;
        }
        std::cout << table;
        const Report report = read_report_csv(report_path);
        v.require(report.complete() && report.rows.size() == 18, std::string(sam) + " report has 18 rows");

        bool layout = table.find("Evaluation of surrogate models for " + std::string(sam)) != std::string::npos;
        for (const Sector& s : all_sample_sets()) layout = layout && table.find(sector_label(s)) != std::string::npos;
        for (const char* label : {"\nR2 ", "\nRMSE ", "\nMAPE ", "\nPT "}) {
            std::size_t count = 0;
            for (auto at = table.find(label); at != std::string::npos; at = table.find(label, at + 1)) ++count;
            layout = layout && count == 3;
        }
        v.require(layout, std::string(sam) + " table layout");

        v.detail << sam << " best R2:";
        for (const Sector& s : all_sample_sets()) {
            double best = -INFINITY;
            Method who = Method::PR;
            for (Method m : kMethods) {
                const MetricsRow* r = report.find(s, m);
                if (r && r->r2 > best) {
                    best = r->r2;
                    who = m;
                }
            }
            v.detail << ' ' << sector_token(s) << '=' << to_string(who) << ' ' << best;
            v.require(best >= 0.90, std::string(sam) + " " + sector_token(s) + " best R2 >= 0.90");
        }
        for (const char* policy : {"accuracy", "speed"}) {
            std::string plan;
            const int code = ezone({"compose", "--report", report_path.string(), "--model-dir", models.string(),
                                    "--policy", policy, "--out",
                                    (dir / (std::string(sam) + "_" + policy + ".json")).string()},
                                   &plan);
            if (code == 0) std::cout << plan;
            v.detail << "; " << policy << " compose exit " << code;
        }
        v.detail << ". ";
    }
}

void criterion_8(Verdict& v) {
    const MissileParams p = sam_a();
    GenerationConfig gen;
    gen.solver = default_solver_config(p);
    gen.solver.dt = 0.02;
    const Dataset ds = generate_dataset(p, sector_by_id(4), 200, 8, gen);
    const std::vector<Sample> rows = ds.solved_rows();
    const std::span<const Sample> all(rows);

    // Largest grid configurations, so these are worst-case evaluation costs.
    MlpHyper mh;
    mh.hidden_layers = 10;
    mh.units = 128;
    mh.max_epochs = 2;
    const std::vector<TrainedModel> models{fit_pr(all, {15, 3}), fit_mlp(all.first(160), all.subspan(160), mh, 1),
                                           fit_rfr(all, RfrHyper{}, 1)};

    std::vector<EngagementQuery> queries;
    for (const Point3& x : lhs(1000, {{{-5000, 45000}, {200, 850}, {0, 180}}}, 88)) queries.push_back({x[0], x[1], x[2]});

    // The simulator's per-shot cost is one full max-range solve at the default step.
    const SolverConfig sim_cfg = default_solver_config(p);
    std::vector<double> sim_times;
    for (int i = 0; i < 7; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        solve_max_range(queries[static_cast<std::size_t>(i) * 100], p, sim_cfg);
        sim_times.push_back(seconds_since(t0));
    }
    std::sort(sim_times.begin(), sim_times.end());
    const double sim_shot = sim_times[sim_times.size() / 2];
    v.detail << "simulator " << sim_shot << " s/shot;";
    for (const TrainedModel& m : models) {
        const Timing t = time_batch_predict(m, queries);
        v.require(t.per_shot_s < 0.01, std::string(to_string(m.method)) + " per-shot < 0.01 s");
        v.require(sim_shot / t.per_shot_s >= 100.0, std::string(to_string(m.method)) + " speed-up >= 100x");
        v.detail << ' ' << to_string(m.method) << " (" << m.hyper_summary() << ") PT " << t.pt_s << " s, "
                 << t.per_shot_s << " s/shot, " << sim_shot / t.per_shot_s << "x;";
    }
}

/// Byte equality of two artifact trees; in report CSVs the wall-clock columns are blanked first.
std::string strip_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::string out, line;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
        if (f.size() == 10) f[6] = f[8] = "";
        for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
        out += '\n';
    }
    return out;
}

void criterion_9(Verdict& v, const fs::path& work) {
    auto pipeline = [&](const fs::path& dir) {
        fs::remove_all(dir);
        const std::string csv = (dir / "sam_a_s4.csv").string();
        return ezone({"dataset", "--sam", "sam_a", "--sector", "s4", "--n", "80", "--seed", "11", "--dt", "0.05",
                      "--out", csv}) == 0 &&
               ezone({"train", "--dataset", csv, "--seed", "11", "--folds", "3", "--max-epochs", "25", "--out",
                      (dir / "models").string()}) == 0 &&
               ezone({"eval", "--model-dir", (dir / "models").string(), "--out", (dir / "report.csv").string()}) == 0;
    };
    const fs::path a = work / "repro_a";
    const fs::path b = work / "repro_b";
    v.require(pipeline(a) && pipeline(b), "both pipeline runs succeed");

    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), a);
        if (!fs::exists(b / rel)) {
            v.require(false, rel.string() + " missing in second run");
            continue;
        }
        std::string x = slurp(e.path()), y = slurp(b / rel);
        if (rel == "report.csv") {
            x = strip_timing(x);
            y = strip_timing(y);
        }
        v.require(x == y, rel.string() + " differs between runs");
        ++compared;
    }
    v.require(compared >= 9, "expected dataset, sidecar, splits, three models, three CV tables and a report");

    const fs::path tampered = work / "repro_tampered.csv";
    {
        std::string test = slurp(a / "models" / "sam_a_s4_test.csv");
        test += "10000,450,175,30\n";
        std::ofstream(tampered, std::ios::binary) << test;
    }
    std::ostringstream o, e;
    const int code = cli::run({"eval", "--models", (a / "models" / "sam_a_s4_rfr.json").string(), "--test",
                               tampered.string(), "--out", (work / "repro_bad.csv").string()},
                              o, e);
    v.require(code == 3, "hash mismatch exits 3 (got " + std::to_string(code) + ")");
    v.detail << compared << " artifacts byte-identical (report timing columns excluded); tampered test set exit "
             << code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int criterion = 0;
    std::string work = "acceptance_work";
    app.add_option("--criterion", criterion, "Criterion number 1-9")->required()->check(CLI::Range(1, 9));
    app.add_option("--workdir", work, "Scratch directory for generated artifacts");
    CLI11_PARSE(app, argc, argv);

    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(work);
        switch (criterion) {
        case 1: criterion_1(v); break;
        case 2: criterion_2(v); break;
        case 3: criterion_3(v); break;
        case 4: criterion_4(v); break;
        case 5: criterion_5(v); break;
        case 6: criterion_6(v); break;
        case 7: criterion_7(v, work); break;
        case 8: criterion_8(v); break;
        case 9: criterion_9(v, work); break;
        }
    } catch (const std::exception& e) {
        v.require(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << criterion << ": " << (v.pass ? "PASS" : "FAIL") << " (" << seconds_since(t0)
              << " s) " << v.detail.str() << std::endl;
    return v.pass ? 0 : 1;
}
