#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "phg/io.hpp"
#include "phg/system.hpp"
#include "phg/tracker.hpp"

namespace phg {

/// System adjusted so that a seeded base point lies on the path at tau0, and
/// `points` copies of that point with 1e-9 relative perturbations.
struct SeededStarts {
    LaurentSystem system;
    PointBatch starts;
};

SeededStarts seeded_on_path_starts(const LaurentSystem& sys, std::size_t points, double tau0, std::uint64_t seed);

struct BenchOptions {
    std::vector<std::size_t> point_counts{10, 50, 250, 500, 1000};
    std::size_t repetitions = 3;
    std::uint64_t seed = 0;
    double tau0 = -20.0;
    std::size_t fixed_steps = 100;
    int newton_iters = 1;
    std::size_t batch_size = 0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    /// Per row: paths that stopped with a numerical failure, summed over repetitions.
    std::vector<std::size_t> failed_paths;
};

/// Times the fixed-step protocol for every point count.
BenchResult run_bench(const LaurentSystem& sys, const BenchOptions& options, const Backend& backend);

/// Exit code for an error kind: 1 usage, 2 data, 3 numerical.
int exit_code_for(const Error& e);

/// Entry point of the `phg` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phg
