#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phg/eval.hpp"
#include "phg/tracker.hpp"

namespace phg {

/// Points document: {"tau0": real, "points": [[[re, im], ...], ...]}.
/// Rows of length N - 1 are affine and get y_h = 1 appended.
PointBatch parse_points(std::string_view text, std::size_t N);
std::string serialize_points(const ComplexMatrix& y, double tau0);

struct EvalReport {
    std::size_t equations = 0;
    std::size_t variables = 0;
    std::vector<ComplexMatrix> blocks;  // one n x (N+2) block per point
    std::optional<double> oracle_max_rel_dev;
};

EvalReport make_eval_report(const ExtendedJacobianBatch& jac);
EvalReport parse_eval_report(std::string_view text);
std::string serialize_eval_report(const EvalReport& report);

struct TrackSummary {
    std::size_t paths = 0;
    std::map<std::string, std::size_t> counts;  // status name -> count
    double wall_seconds = 0.0;
};

TrackSummary summarize(const std::vector<TrackResult>& results, double wall_seconds);

/// One JSON object per line, then a final {"summary": ...} line.
std::string serialize_track_results(const std::vector<TrackResult>& results, const TrackSummary& summary);

struct TrackReport {
    std::vector<TrackResult> results;  // start_y / start_tau are not stored
    TrackSummary summary;
};

TrackReport parse_track_results(std::string_view text);

struct BenchRow {
    std::size_t points = 0;
    /// Empty when the row could not be completed; written as "-".
    std::optional<double> mean_seconds;
    std::optional<double> std_seconds;
    std::optional<double> per_point_us;
    std::string backend;

    bool operator==(const BenchRow&) const = default;
};

inline constexpr std::string_view bench_csv_header = "points,mean_seconds,std_seconds,per_point_us,backend";

std::string serialize_bench_csv(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_bench_csv(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace phg
