#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ez/error.hpp"
#include "ez/sampling.hpp"
#include "ez/sha256.hpp"

using namespace ez;

namespace {

const std::array<Interval, 3> kBox{{{-5000, 45000}, {200, 850}, {0, 180}}};

/// True when the sorted values of one dimension put exactly one point in each of n strata.
bool one_per_stratum(const std::vector<Point3>& pts, std::size_t dim, const Interval& iv) {
    const std::size_t n = pts.size();
    std::vector<int> hits(n, 0);
    for (const Point3& p : pts) {
        const double u = (p[dim] - iv.lo) / (iv.hi - iv.lo);
        if (u < 0.0 || u >= 1.0) return false;
        ++hits[std::min(n - 1, static_cast<std::size_t>(std::floor(u * static_cast<double>(n))))];
    }
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

} // namespace

TEST_CASE("lhs stratifies every dimension") {
    for (std::size_t n : {1u, 5u, 50u, 500u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto pts = lhs(n, kBox, seed);
            REQUIRE(pts.size() == n);
            for (std::size_t d = 0; d < 3; ++d) CHECK(one_per_stratum(pts, d, kBox[d]));
        }
    }
    CHECK(lhs(50, kBox, 9) == lhs(50, kBox, 9));
    CHECK(lhs(50, kBox, 9) != lhs(50, kBox, 10));
}

TEST_CASE("sectors tile the aspect interval") {
    CHECK(sector_of(143.999).id == 0);
    CHECK(sector_of(144.0).id == 1);
    CHECK(sector_of(153.0).id == 2);
    CHECK(sector_of(171.0).id == 4);
    CHECK(sector_of(180.0).id == 4);
    CHECK(sector_of(0.0).id == 0);
    CHECK_THROWS_AS(sector_of(-0.1), DomainError);
    CHECK_THROWS_AS(sector_of(180.1), DomainError);

    for (double a = 0.0; a <= 180.0; a += 0.05) {
        int owners = 0;
        for (int id = 0; id < kSectorCount; ++id) owners += sector_by_id(id).contains(a) ? 1 : 0;
        CHECK(owners == 1);
        CHECK(sector_by_id(sector_of(a).id).contains(a));
        CHECK(whole_sector().contains(a));
    }
    CHECK(sector_label(sector_by_id(0)) == "[0,144)");
    CHECK(sector_label(sector_by_id(4)) == "[171,180]");
    CHECK(sector_label(whole_sector()) == "[0,180]");
    for (const Sector& s : all_sample_sets()) CHECK(parse_sector(sector_token(s)) == s);
    CHECK_THROWS_AS(parse_sector("s7"), ValidationError);
}

TEST_CASE("train/test split sizes and disjointness") {
    std::vector<Sample> rows;
    for (int i = 0; i < 5000; ++i) rows.push_back({double(i), 300, 10, 1.0 + i});
    const Split s = split_train_test(rows, 0.8, 4);
    CHECK(s.train.size() == 4000);
    CHECK(s.test.size() == 1000);
    std::set<double> seen;
    for (const Sample& r : s.train) seen.insert(r.elevation_ft);
    for (const Sample& r : s.test) CHECK(seen.insert(r.elevation_ft).second);
    CHECK(seen.size() == rows.size());
    CHECK(std::is_sorted(s.test.begin(), s.test.end(),
                         [](const Sample& a, const Sample& b) { return a.elevation_ft < b.elevation_ft; }));

    std::vector<Sample> whole(rows.begin(), rows.end());
    for (int i = 0; i < 20000; ++i) whole.push_back({5000.0 + i, 300, 10, 1.0});
    CHECK(split_train_test(whole, 0.8, 1).test.size() == 5000);
    CHECK(split_train_test({rows[0], rows[1], rows[2]}, 0.8, 1).train.size() == 3);
}

TEST_CASE("k-fold partitions") {
    const auto folds = kfold(4000, 5, 3);
    REQUIRE(folds.size() == 5);
    std::vector<int> count(4000, 0);
    for (const auto& f : folds) {
        CHECK(f.size() == 800);
        for (std::size_t i : f) ++count[i];
    }
    CHECK(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; }));

    const auto uneven = kfold(23, 5, 1);
    std::size_t lo = 100, hi = 0;
    for (const auto& f : uneven) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
    }
    CHECK(hi - lo <= 1);
    CHECK_THROWS_AS(kfold(10, 1, 0), ValidationError);
    CHECK_THROWS_AS(kfold(3, 5, 0), ValidationError);
}

TEST_CASE("dataset csv round trip and hashing") {
    const std::vector<Sample> rows{{1000.5, 321.25, 170.125, 12.0625}, {-4999.99, 849.9, 0.001, kNoEngagementSentinel}};
    const std::string csv = dataset_csv(rows);
    CHECK(csv.rfind(std::string(kDatasetHeader) + "\n", 0) == 0);
    CHECK(parse_dataset_csv(csv) == rows);
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS_AS(parse_dataset_csv("a,b,c,d\n1,2,3,4\n"), ArtifactError);
    CHECK_THROWS_AS(parse_dataset_csv(std::string(kDatasetHeader) + "\n1,2,x,4\n"), ArtifactError);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("dataset generation is deterministic and worker independent") {
    const MissileParams p = sam_a();
    GenerationConfig cfg;
    cfg.solver = default_solver_config(p);
    cfg.solver.dt = 0.05;
    cfg.solver.tolerance_nm = 0.5;
    const Sector s = sector_by_id(3);
    const Dataset a = generate_dataset(p, s, 6, 21, cfg);
    const Dataset b = generate_dataset_serial(p, s, 6, 21, cfg);
    CHECK(dataset_csv(a.rows) == dataset_csv(b.rows));
    CHECK(a.rows.size() == 6);
    for (const Sample& r : a.rows) {
        CHECK(s.contains(r.aspect_deg));
        CHECK(in_box(r.query()));
        CHECK(r.max_range_nm > 0.0);
    }
    CHECK(a.counts.solved == 6);
}

TEST_CASE("no-engagement points are redrawn, then recorded with a sentinel") {
    // A missile that cannot reach anything: every point exhausts its retries.
    MissileParams weak = sam_a();
    weak.boost_thrust = 2500.0;
    weak.sustain_thrust = 200.0;
    GenerationConfig cfg;
    cfg.solver = default_solver_config(weak);
    cfg.solver.dt = 0.05;
    cfg.solver.scan_max_nm = 4.0;
    cfg.retry_cap = 1;
    CHECK_THROWS_AS(generate_dataset(weak, sector_by_id(0), 3, 2, cfg), GenerationError);
    cfg.max_sentinel_fraction = 1.0;
    const Dataset d = generate_dataset(weak, sector_by_id(0), 3, 2, cfg);
    CHECK(d.counts.sentinel == 3);
    CHECK(d.counts.redraws == 3);
    CHECK(d.solved_rows().empty());
    for (const Sample& r : d.rows) CHECK(r.max_range_nm == kNoEngagementSentinel);
}

TEST_CASE("merging sector datasets") {
    Dataset a, b;
    a.sam_id = b.sam_id = "sam_a";
    a.sector = sector_by_id(0);
    b.sector = sector_by_id(4);
    a.rows = {{0, 300, 10, 5}};
    b.rows = {{0, 300, 175, 20}, {100, 400, 172, 21}};
    const Dataset m = merge_sectors({a, b});
    CHECK(m.sector.is_whole());
    CHECK(m.rows.size() == 3);
    CHECK(m.rows.front() == a.rows.front());
    b.sam_id = "sam_b";
    CHECK_THROWS_AS(merge_sectors({a, b}), ValidationError);
}
