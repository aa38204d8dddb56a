#include "ez/evaluation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ez/error.hpp"

namespace ez {

namespace {

void require_same_length(std::span<const double> y, std::span<const double> y_hat, const char* what) {
    if (y.size() != y_hat.size())
        throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                              std::to_string(y_hat.size()) + ")");
    if (y.empty()) throw ValidationError(std::string(what) + ": empty input");
}

} // namespace

double percentage_error(double y, double y_hat) {
    if (!(y > 0)) throw DomainError("percentage_error: reference value must be positive, got " + format_double(y));
    return 100.0 * std::abs(y_hat - y) / y;
}

std::size_t count_outliers(std::span<const double> y, std::span<const double> y_hat, double threshold_pct) {
    require_same_length(y, y_hat, "count_outliers");
    std::size_t n = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (percentage_error(y[i], y_hat[i]) > threshold_pct) ++n;
    return n;
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
    require_same_length(y, y_hat, "r2");
    if (y.size() < 2) throw DomainError("r2: needs at least two rows");
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sse = 0;
    double sst = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (sst == 0) throw DomainError("r2: undefined for targets with zero variance");
    return 1.0 - sse / sst;
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
    require_same_length(y, y_hat, "rmse");
    double sse = 0;
    for (std::size_t i = 0; i < y.size(); ++i) sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    return std::sqrt(sse / static_cast<double>(y.size()));
}

double mape(std::span<const double> y, std::span<const double> y_hat) {
    require_same_length(y, y_hat, "mape");
    double sum = 0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += percentage_error(y[i], y_hat[i]);
    return sum / static_cast<double>(y.size());
}

Timing time_batch_predict(const TrainedModel& model, std::span<const EngagementQuery> queries) {
    if (queries.empty()) throw ValidationError("time_batch_predict: no queries");
    std::array<double, 3> runs{};
    volatile double sink = 0;
    for (double& run : runs) {
        const auto start = std::chrono::steady_clock::now();
        const std::vector<double> out = model.predict_batch(queries);
        const auto stop = std::chrono::steady_clock::now();
        sink = sink + out.back();
        run = std::chrono::duration<double>(stop - start).count();
    }
    std::sort(runs.begin(), runs.end());
    return {runs[1], runs[1] / static_cast<double>(queries.size())};
}

MetricsRow evaluate_model(const TrainedModel& model, std::span<const Sample> test) {
    if (test.empty()) throw ValidationError("evaluate_model: empty test set");
    std::vector<EngagementQuery> queries;
    std::vector<double> y;
    queries.reserve(test.size());
    y.reserve(test.size());
    for (const Sample& s : test) {
        queries.push_back(s.query());
        y.push_back(s.max_range_nm);
    }
    const std::vector<double> y_hat = model.predict_batch(queries);
    MetricsRow row;
    row.sam_id = model.sam_id;
    row.sector = model.sector;
    row.method = model.method;
    row.r2 = r2(y, y_hat);
    row.rmse_nm = rmse(y, y_hat);
    row.mape_pct = mape(y, y_hat);
    row.outlier_count = count_outliers(y, y_hat);
    const Timing t = time_batch_predict(model, queries);
    row.pt_s = t.pt_s;
    row.per_shot_s = t.per_shot_s;
    row.n_test = test.size();
    return row;
}

const MetricsRow* Report::find(const Sector& s, Method m) const {
    for (const MetricsRow& r : rows)
        if (r.sector.id == s.id && r.method == m) return &r;
    return nullptr;
}

bool Report::complete() const {
    for (const Sector& s : all_sample_sets())
        for (Method m : kMethods)
            if (!find(s, m)) return false;
    return true;
}

Report build_report(std::vector<MetricsRow> rows) {
    if (rows.empty()) throw ValidationError("build_report: no rows");
    Report r;
    r.sam_id = rows.front().sam_id;
    std::set<std::pair<int, int>> seen;
    for (const MetricsRow& row : rows) {
        if (row.sam_id != r.sam_id)
            throw ValidationError("build_report: rows mix archetypes '" + r.sam_id + "' and '" + row.sam_id + "'");
        if (!seen.emplace(row.sector.id, static_cast<int>(row.method)).second)
            throw ValidationError("build_report: duplicate cell " + sector_token(row.sector) + "/" +
                                  std::string(to_string(row.method)));
    }
    std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        if (a.sector.id != b.sector.id) return a.sector.id < b.sector.id;
        return a.method < b.method;
    });
    r.rows = std::move(rows);
    return r;
}

std::string report_csv(const Report& r) {
    std::string out(kReportHeader);
    out += '\n';
    for (const MetricsRow& row : r.rows) {
        out += row.sam_id + ',' + sector_token(row.sector) + ',' + std::string(to_string(row.method)) + ',' +
               format_double(row.r2) + ',' + format_double(row.rmse_nm) + ',' + format_double(row.mape_pct) + ',' +
               format_double(row.pt_s) + ',' + std::to_string(row.n_test) + ',' + format_double(row.per_shot_s) +
               ',' + std::to_string(row.outlier_count) + '\n';
    }
    return out;
}

Report parse_report_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("report CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kReportHeader) throw ArtifactError("report CSV: unexpected header '" + line + "'");
    std::vector<MetricsRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 10) throw ArtifactError("report CSV line " + std::to_string(line_no) + ": expected 10 fields");
        try {
            MetricsRow row;
            row.sam_id = f[0];
            row.sector = parse_sector(f[1]);
            row.method = parse_method(f[2]);
            row.r2 = std::stod(f[3]);
            row.rmse_nm = std::stod(f[4]);
            row.mape_pct = std::stod(f[5]);
            row.pt_s = std::stod(f[6]);
            row.n_test = std::stoul(f[7]);
            row.per_shot_s = std::stod(f[8]);
            row.outlier_count = std::stoul(f[9]);
            rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            throw ArtifactError("report CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return build_report(std::move(rows));
    } catch (const ValidationError& e) {
        throw ArtifactError(std::string("report CSV: ") + e.what());
    }
}

Report read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open report " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_report_csv(buffer.str());
}

namespace {

std::string fixed(double v, int decimals, const char* suffix = "") {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f%s", decimals, v, suffix);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// One block: header line plus R2/RMSE/MAPE/PT lines, each a list of cells.
std::array<std::string, 5> block(const Report& r, const Sector& s) {
    constexpr std::size_t kLabel = 11;
    constexpr std::size_t kCell = 9;
    std::array<std::string, 5> lines;
    lines[0] = pad_right(sector_label(s), kLabel);
    lines[1] = pad_right("R2", kLabel);
    lines[2] = pad_right("RMSE", kLabel);
    lines[3] = pad_right("MAPE", kLabel);
    lines[4] = pad_right("PT", kLabel);
    for (Method m : kMethods) {
        lines[0] += pad(std::string(to_string(m)), kCell);
        const MetricsRow* row = r.find(s, m);
        lines[1] += pad(row ? fixed(row->r2, 4) : "-", kCell);
        lines[2] += pad(row ? fixed(row->rmse_nm, 4) : "-", kCell);
        lines[3] += pad(row ? fixed(row->mape_pct, 2, "%") : "-", kCell);
        lines[4] += pad(row ? fixed(row->pt_s, 4) : "-", kCell);
    }
    return lines;
}

} // namespace

std::string render_report_table(const Report& r) {
    std::vector<Sector> sets;
    for (const Sector& s : all_sample_sets()) {
        bool any = false;
        for (Method m : kMethods) any = any || r.find(s, m);
        if (any) sets.push_back(s);
    }
    std::ostringstream os;
    os << "Evaluation of surrogate models for " << r.sam_id << " on held-out test rows\n\n";
    for (std::size_t i = 0; i < sets.size(); i += 2) {
        const auto left = block(r, sets[i]);
        const bool paired = i + 1 < sets.size();
        const auto right = paired ? block(r, sets[i + 1]) : std::array<std::string, 5>{};
        for (std::size_t k = 0; k < left.size(); ++k) {
            os << left[k];
            if (paired) os << "    " << right[k];
            os << '\n';
        }
        os << '\n';
    }
    return os.str();
}

} // namespace ez
