#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ez/envelope.hpp"

namespace ez {

struct Interval {
    double lo;
    double hi;
};

using Point3 = std::array<double, 3>;

/// Latin hypercube: in every dimension each of the n equal-width strata holds exactly one point.
std::vector<Point3> lhs(std::size_t n, const std::array<Interval, 3>& bounds, std::uint64_t seed);

/// Aspect sectors [0,144) [144,153) [153,162) [162,171) [171,180], plus Whole = [0,180].
struct Sector {
    int id = 0; // 0..4, kWholeSector for the whole interval
    double lo_deg = 0;
    double hi_deg = 0;

    bool is_whole() const;
    bool contains(double aspect_deg) const;
    friend bool operator==(const Sector&, const Sector&) = default;
};

inline constexpr int kSectorCount = 5;
inline constexpr int kWholeSector = 5;

Sector sector_by_id(int id);
Sector whole_sector();
/// All five sectors followed by Whole.
std::vector<Sector> all_sample_sets();
/// Throws DomainError outside [0, 180]; 180 maps to sector 4.
Sector sector_of(double aspect_deg);
/// Short token used in files: s0..s4, whole.
std::string sector_token(const Sector& s);
/// Interval label, e.g. "[0,144)", "[171,180]", "[0,180]".
std::string sector_label(const Sector& s);
/// Parses a token (s0..s4, whole) or a bare index 0..4.
Sector parse_sector(std::string_view token);

struct Sample {
    double elevation_ft = 0;
    double speed_kt = 0;
    double aspect_deg = 0;
    double max_range_nm = 0;

    EngagementQuery query() const { return {elevation_ft, speed_kt, aspect_deg}; }
    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Range recorded for points that never produced an engagement within the retry cap.
inline constexpr double kNoEngagementSentinel = -1.0;

struct GenerationCounts {
    std::size_t requested = 0;
    std::size_t solved = 0;
    std::size_t redraws = 0;
    std::size_t sentinel = 0;
    std::size_t engagements_run = 0;
};

struct Dataset {
    std::vector<Sample> rows;
    std::string sam_id;
    Sector sector;
    std::uint64_t seed = 0;
    GenerationCounts counts;

    /// Rows with a solved range, in file order.
    std::vector<Sample> solved_rows() const;
};

struct GenerationConfig {
    SolverConfig solver;
    int retry_cap = 5;
    double max_sentinel_fraction = 0.20;
    int workers = 0; // 0 = OpenMP default
};

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// LHS over (elevation, speed, sector aspect), one max-range solve per point, run across the
/// OpenMP worker pool. Rows are ordered by sample index, so output does not depend on scheduling.
Dataset generate_dataset(const MissileParams& sam, const Sector& sector, std::size_t n, std::uint64_t seed,
                         const GenerationConfig& cfg);

/// Single-threaded reference with identical output.
Dataset generate_dataset_serial(const MissileParams& sam, const Sector& sector, std::size_t n,
                                std::uint64_t seed, const GenerationConfig& cfg);

/// Union of per-sector datasets (in sector order) labelled as the Whole interval.
Dataset merge_sectors(const std::vector<Dataset>& parts);

struct Split {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

/// Seeded shuffle; train gets ceil(ratio * n) rows. Both parts keep original relative order.
Split split_train_test(const std::vector<Sample>& rows, double ratio, std::uint64_t seed);

/// k disjoint index folds over [0, n) whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, int k, std::uint64_t seed);

inline constexpr std::string_view kDatasetHeader = "alt_ft,speed_kt,aspect_deg,max_range_nm";

std::string dataset_csv(const std::vector<Sample>& rows);
std::vector<Sample> parse_dataset_csv(std::string_view text);
std::vector<Sample> read_dataset_csv(const std::filesystem::path& path);

/// Sidecar metadata (JSON text) describing how a dataset file was produced.
std::string dataset_sidecar_json(const Dataset& ds, const GenerationConfig& cfg, std::string_view csv_sha256);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace ez
