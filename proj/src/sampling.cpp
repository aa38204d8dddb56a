#include "ez/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ez/error.hpp"
#include "ez/parallel.hpp"
#include "ez/rng.hpp"

namespace ez {

std::vector<Point3> lhs(std::size_t n, const std::array<Interval, 3>& bounds, std::uint64_t seed) {
    if (n == 0) throw ValidationError("lhs: n must be >= 1");
    for (const Interval& b : bounds)
        if (!(b.hi > b.lo)) throw ValidationError("lhs: degenerate bounds");
    Rng rng(seed);
    std::vector<Point3> points(n);
    for (std::size_t d = 0; d < 3; ++d) {
        std::vector<std::size_t> strata = iota_indices(n);
        rng.shuffle(strata);
        const double width = (bounds[d].hi - bounds[d].lo) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = bounds[d].lo + (static_cast<double>(strata[i]) + rng.uniform()) * width;
            // Keep rounding from pushing a point into the next stratum or past hi.
            const double cell_hi = bounds[d].lo + static_cast<double>(strata[i] + 1) * width;
            points[i][d] = std::min(v, std::nextafter(cell_hi, bounds[d].lo));
        }
    }
    return points;
}

bool Sector::is_whole() const { return id == kWholeSector; }

bool Sector::contains(double aspect_deg) const {
    if (id == kSectorCount - 1 || is_whole()) return aspect_deg >= lo_deg && aspect_deg <= hi_deg;
    return aspect_deg >= lo_deg && aspect_deg < hi_deg;
}

Sector sector_by_id(int id) {
    static constexpr double kEdges[] = {0.0, 144.0, 153.0, 162.0, 171.0, 180.0};
    if (id == kWholeSector) return whole_sector();
    if (id < 0 || id >= kSectorCount) throw DomainError("sector id " + std::to_string(id) + " out of range");
    return {id, kEdges[id], kEdges[id + 1]};
}

Sector whole_sector() { return {kWholeSector, 0.0, 180.0}; }

std::vector<Sector> all_sample_sets() {
    std::vector<Sector> out;
    for (int i = 0; i < kSectorCount; ++i) out.push_back(sector_by_id(i));
    out.push_back(whole_sector());
    return out;
}

Sector sector_of(double aspect_deg) {
    if (!(aspect_deg >= 0.0 && aspect_deg <= 180.0)) {
        std::ostringstream msg;
        msg << "sector_of: aspect " << aspect_deg << " deg outside [0, 180]";
        throw DomainError(msg.str());
    }
    for (int i = 0; i < kSectorCount; ++i) {
        Sector s = sector_by_id(i);
        if (s.contains(aspect_deg)) return s;
    }
    return sector_by_id(kSectorCount - 1);
}

std::string sector_token(const Sector& s) { return s.is_whole() ? "whole" : "s" + std::to_string(s.id); }

std::string sector_label(const Sector& s) {
    std::ostringstream os;
    os << '[' << s.lo_deg << ',' << s.hi_deg << (s.is_whole() || s.id == kSectorCount - 1 ? ']' : ')');
    return os.str();
}

Sector parse_sector(std::string_view token) {
    if (token == "whole") return whole_sector();
    std::string_view digits = token;
    if (!digits.empty() && digits.front() == 's') digits.remove_prefix(1);
    int id = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || id < 0 || id >= kSectorCount)
        throw ValidationError("unknown sector '" + std::string(token) + "' (expected s0..s4 or whole)");
    return sector_by_id(id);
}

std::vector<Sample> Dataset::solved_rows() const {
    std::vector<Sample> out;
    out.reserve(rows.size());
    for (const Sample& s : rows)
        if (s.max_range_nm > 0) out.push_back(s);
    return out;
}

namespace {

std::array<Interval, 3> sampling_box(const Sector& sector) {
    const InputBox& b = kInputBox;
    return {Interval{b.elevation_lo_ft, b.elevation_hi_ft}, Interval{b.speed_lo_kt, b.speed_hi_kt},
            Interval{sector.lo_deg, sector.hi_deg}};
}

struct PointResult {
    Sample sample;
    std::size_t redraws = 0;
    std::size_t engagements = 0;
    bool solved = false;
};

// A NoEngagement point is replaced by a fresh uniform draw over the sector box, seeded by
// (seed, index, attempt) so the outcome is independent of worker scheduling.
PointResult solve_point(const MissileParams& sam, const std::array<Interval, 3>& box, const Point3& first,
                        std::size_t index, std::uint64_t seed, const GenerationConfig& cfg) {
    PointResult r;
    Point3 x = first;
    for (int attempt = 0;; ++attempt) {
        const EngagementQuery q{x[0], x[1], x[2]};
        const MaxRangeResult m = solve_max_range(q, sam, cfg.solver);
        r.engagements += static_cast<std::size_t>(m.engagements_run);
        r.sample = {x[0], x[1], x[2], kNoEngagementSentinel};
        if (m.status == SolveStatus::Solved) {
            r.sample.max_range_nm = m.max_range_nm;
            r.solved = true;
            return r;
        }
        if (attempt >= cfg.retry_cap) return r;
        ++r.redraws;
        Rng rng(derive_seed(seed, {0x5245445257ULL, index, static_cast<std::uint64_t>(attempt)}));
        for (std::size_t d = 0; d < 3; ++d) {
            x[d] = rng.uniform(box[d].lo, box[d].hi);
        }
    }
}

template <typename Loop>
Dataset generate_with(const MissileParams& sam, const Sector& sector, std::size_t n, std::uint64_t seed,
                      const GenerationConfig& cfg, Loop&& loop) {
    if (n == 0) throw ValidationError("generate_dataset: n must be >= 1");
    const auto box = sampling_box(sector);
    const std::vector<Point3> points = lhs(n, box, seed);
    std::vector<PointResult> results(n);
    loop(n, [&](std::size_t i) { results[i] = solve_point(sam, box, points[i], i, seed, cfg); });

    Dataset ds;
    ds.sam_id = sam.name;
    ds.sector = sector;
    ds.seed = seed;
    ds.counts.requested = n;
    ds.rows.reserve(n);
    for (const PointResult& r : results) {
        ds.rows.push_back(r.sample);
        ds.counts.redraws += r.redraws;
        ds.counts.engagements_run += r.engagements;
        if (r.solved)
            ++ds.counts.solved;
        else
            ++ds.counts.sentinel;
    }
    if (static_cast<double>(ds.counts.sentinel) > cfg.max_sentinel_fraction * static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "generate_dataset: " << ds.counts.sentinel << " of " << n << " points produced no engagement after "
            << cfg.retry_cap << " redraws; archetype " << sam.name << " incompatible with sector "
            << sector_label(sector);
        throw GenerationError(msg.str());
    }
    return ds;
}

} // namespace

Dataset generate_dataset(const MissileParams& sam, const Sector& sector, std::size_t n, std::uint64_t seed,
                         const GenerationConfig& cfg) {
    return generate_with(sam, sector, n, seed, cfg, [&](std::size_t count, auto&& body) {
        parallel_for(count, cfg.workers, body);
    });
}

Dataset generate_dataset_serial(const MissileParams& sam, const Sector& sector, std::size_t n,
                                std::uint64_t seed, const GenerationConfig& cfg) {
    return generate_with(sam, sector, n, seed, cfg,
                         [](std::size_t count, auto&& body) { serial_for(count, body); });
}

Dataset merge_sectors(const std::vector<Dataset>& parts) {
    if (parts.empty()) throw ValidationError("merge_sectors: no datasets");
    Dataset out;
    out.sam_id = parts.front().sam_id;
    out.sector = whole_sector();
    out.seed = parts.front().seed;
    for (const Dataset& d : parts) {
        if (d.sam_id != out.sam_id) throw ValidationError("merge_sectors: mixed archetypes");
        if (d.sector.is_whole()) throw ValidationError("merge_sectors: input already covers the whole interval");
        out.rows.insert(out.rows.end(), d.rows.begin(), d.rows.end());
        out.counts.requested += d.counts.requested;
        out.counts.solved += d.counts.solved;
        out.counts.redraws += d.counts.redraws;
        out.counts.sentinel += d.counts.sentinel;
        out.counts.engagements_run += d.counts.engagements_run;
    }
    return out;
}

Split split_train_test(const std::vector<Sample>& rows, double ratio, std::uint64_t seed) {
    if (rows.empty()) throw ValidationError("split_train_test: empty dataset");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split_train_test: ratio must be in (0, 1)");
    std::vector<std::size_t> order = iota_indices(rows.size());
    Rng rng(seed);
    rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(rows.size()) - 1e-9));
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    Split s;
    for (std::size_t i : train_idx) s.train.push_back(rows[i]);
    for (std::size_t i : test_idx) s.test.push_back(rows[i]);
    return s;
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold: k must be >= 2");
    if (n < static_cast<std::size_t>(k)) throw ValidationError("kfold: fewer rows than folds");
    std::vector<std::size_t> order = iota_indices(n);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string dataset_csv(const std::vector<Sample>& rows) {
    std::string out(kDatasetHeader);
    out += '\n';
    for (const Sample& s : rows) {
        out += format_double(s.elevation_ft);
        out += ',';
        out += format_double(s.speed_kt);
        out += ',';
        out += format_double(s.aspect_deg);
        out += ',';
        out += format_double(s.max_range_nm);
        out += '\n';
    }
    return out;
}

std::vector<Sample> parse_dataset_csv(std::string_view text) {
    std::vector<Sample> rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != kDatasetHeader)
                throw ArtifactError("dataset CSV: expected header '" + std::string(kDatasetHeader) + "'");
            continue;
        }
        if (line.empty()) continue;
        double v[4];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int c = 0; c < 4; ++c) {
            auto [next, ec] = std::from_chars(p, end, v[c]);
            const char expected = c == 3 ? '\0' : ',';
            if (ec != std::errc() || (c < 3 && (next == end || *next != expected)) || (c == 3 && next != end))
                throw ArtifactError("dataset CSV: malformed line " + std::to_string(line_no));
            p = next + (c < 3 ? 1 : 0);
        }
        rows.push_back({v[0], v[1], v[2], v[3]});
    }
    if (line_no == 0) throw ArtifactError("dataset CSV: empty file");
    return rows;
}

std::vector<Sample> read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open dataset " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset_csv(buffer.str());
}

std::string dataset_sidecar_json(const Dataset& ds, const GenerationConfig& cfg, std::string_view csv_sha256) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["sam_id"] = ds.sam_id;
    j["sector"] = sector_token(ds.sector);
    j["sector_interval"] = sector_label(ds.sector);
    j["seed"] = ds.seed;
    j["solver"] = {{"scan_max_nm", cfg.solver.scan_max_nm},
                   {"scan_step_nm", cfg.solver.scan_step_nm},
                   {"tolerance_nm", cfg.solver.tolerance_nm},
                   {"fine_step_nm", cfg.solver.fine_step_nm},
                   {"dt", cfg.solver.dt}};
    j["retry_cap"] = cfg.retry_cap;
    j["counts"] = {{"requested", ds.counts.requested},
                   {"solved", ds.counts.solved},
                   {"redraws", ds.counts.redraws},
                   {"sentinel", ds.counts.sentinel},
                   {"engagements_run", ds.counts.engagements_run}};
    j["csv_sha256"] = csv_sha256;
    return j.dump(2) + "\n";
}

} // namespace ez
