#include "phg/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <new>
#include <optional>
#include <random>
#include <set>

#include <CLI11.hpp>

namespace phg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool is_numerical_failure(PathStatus s) {
    return s != PathStatus::converged && s != PathStatus::unconverged;
}

std::shared_ptr<const Backend> pick_backend(const std::string& name) {
    return name.empty() ? default_backend() : make_backend(name);
}

struct CommonArgs {
    std::string system_path;
    std::string points_path;
    std::string out_path;
    std::size_t batch_size = 0;
    std::string backend;
    std::uint64_t seed = 0;
    std::optional<double> tau0;
};

void emit(const CommonArgs& a, std::ostream& out, const std::string& text) {
    if (a.out_path.empty()) {
        out << text;
    } else {
        write_text_file(a.out_path, text);
    }
}

HomogenizedSystem load_system(const std::string& path) { return homogenize(parse_system(read_text_file(path))); }

int cmd_gen(const std::string& kind, int n, int m, double c, int min_exp, int max_exp, const CommonArgs& a,
            const std::string& points_out, std::size_t point_count, std::ostream& out, std::ostream& err) {
    const LiftingSource lifting{a.seed, std::nullopt};
    LaurentSystem sys = [&] {
        if (kind == "cyclic") return gen_cyclic(n, lifting);
        if (kind == "chandra") return gen_chandra(n, c, lifting);
        if (kind == "random") {
            RandomSystemOptions o;
            o.n = n;
            o.m = m > 0 ? m : 2 * n + 2;
            o.min_exponent = min_exp;
            o.max_exponent = max_exp;
            o.seed = a.seed;
            return gen_random(o);
        }
        throw UsageError("unsupported system kind '" + kind + "' (expected cyclic, chandra or random)");
    }();
    if (!points_out.empty()) {
        auto seeded = seeded_on_path_starts(sys, point_count, a.tau0.value_or(-20.0), a.seed);
        sys = std::move(seeded.system);
        write_text_file(points_out, serialize_points(seeded.starts.y, seeded.starts.tau.empty()
                                                                        ? a.tau0.value_or(-20.0)
                                                                        : seeded.starts.tau.front()));
    }
    emit(a, out, serialize_system(sys));
    (a.out_path.empty() ? err : out) << "m=" << sys.m() << " N=" << sys.n() + 1 << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& a, bool check_oracle, std::ostream& out, std::ostream& err) {
    const HomogenizedSystem hsys = load_system(a.system_path);
    const HomotopyTables tables = build_tables(hsys);
    PointBatch pts = parse_points(read_text_file(a.points_path), hsys.N());
    if (a.tau0) pts = make_point_batch(std::move(pts.y), std::vector<double>(pts.size(), *a.tau0));
    const auto backend = pick_backend(a.backend);

    const auto jac = evaluate_batch(pts, tables, *backend, EvalOptions{a.batch_size, 1});
    EvalReport report = make_eval_report(jac);
    if (check_oracle) {
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const ComplexMatrix ref = eval_scalar_oracle(pts.y.row(i), pts.tau[i], hsys);
            const double scale = frobenius_norm(ref);
            double diff = 0.0;
            for (std::size_t k = 0; k < ref.size(); ++k) diff += std::norm(report.blocks[i].data()[k] - ref.data()[k]);
            diff = std::sqrt(diff);
            worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
        }
        report.oracle_max_rel_dev = worst;
        err << "oracle max relative deviation: " << std::setprecision(3) << std::scientific << worst << "\n";
    }
    emit(a, out, serialize_eval_report(report));
    return 0;
}

int cmd_track(const CommonArgs& a, std::optional<std::size_t> fixed_steps, std::optional<int> newton_iters,
              bool skip_start_check, std::ostream& out, std::ostream& err) {
    const HomogenizedSystem hsys = load_system(a.system_path);
    const HomotopyTables tables = build_tables(hsys);
    PointBatch pts = parse_points(read_text_file(a.points_path), hsys.N());
    const double tau0 = a.tau0 ? *a.tau0 : (pts.tau.empty() ? -20.0 : pts.tau.front());
    pts = make_point_batch(std::move(pts.y), std::vector<double>(pts.size(), tau0));
    const auto backend = pick_backend(a.backend);

    TrackOptions opts;
    opts.tau0 = tau0;
    opts.eval.batch_size = a.batch_size;
    opts.skip_start_check = skip_start_check;
    if (fixed_steps) {
        opts.fixed_step_mode = true;
        opts.fixed_steps = *fixed_steps;
    }
    if (newton_iters) opts.newton_max_iters = *newton_iters;

    const auto t0 = Clock::now();
    const auto results = track_batch(pts, tables, opts, *backend);
    const TrackSummary summary = summarize(results, seconds_since(t0));
    emit(a, out, serialize_track_results(results, summary));

    err << summary.paths << " paths";
    for (const auto& [name, count] : summary.counts) err << ", " << name << " " << count;
    err << "; wall time " << std::setprecision(4) << summary.wall_seconds << " s\n";

    const bool any_ok = std::any_of(results.begin(), results.end(),
                                    [](const TrackResult& r) { return !is_numerical_failure(r.status); });
    return results.empty() || any_ok ? 0 : 3;
}

int cmd_bench(const CommonArgs& a, const BenchOptions& base, std::ostream& out, std::ostream& err) {
    const LaurentSystem sys = parse_system(read_text_file(a.system_path));
    const auto backend = pick_backend(a.backend);
    BenchOptions opts = base;
    opts.seed = a.seed;
    opts.batch_size = a.batch_size;
    if (a.tau0) opts.tau0 = *a.tau0;

    const BenchResult res = run_bench(sys, opts, *backend);
    emit(a, out, serialize_bench_csv(res.rows));
    std::size_t failed = 0;
    for (std::size_t r = 0; r < res.rows.size(); ++r) {
        failed += res.failed_paths[r];
        if (res.failed_paths[r] > 0)
            err << "p=" << res.rows[r].points << ": " << res.failed_paths[r] << " paths failed numerically\n";
    }
    return failed > 0 ? 3 : 0;
}

}  // namespace

SeededStarts seeded_on_path_starts(const LaurentSystem& sys, std::size_t points, double tau0, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t N = sys.n() + 1;

    std::vector<Complex> base(N, 1.0);
    for (std::size_t j = 0; j + 1 < N; ++j) base[j] = std::polar(1.0, angle(rng));
    SeededStarts out{adjust_for_start_point(sys, base, tau0), {}};

    ComplexMatrix y(points, N);
    for (std::size_t i = 0; i < points; ++i)
        for (std::size_t j = 0; j < N; ++j) y(i, j) = base[j] * (1.0 + 1e-9 * Complex(noise(rng), noise(rng)));
    out.starts = make_point_batch(std::move(y), std::vector<double>(points, tau0));
    return out;
}

BenchResult run_bench(const LaurentSystem& sys, const BenchOptions& options, const Backend& backend) {
    if (options.repetitions == 0) throw UsageError("repetitions must be positive");
    BenchResult out;
    const std::size_t largest =
        options.point_counts.empty() ? 0 : *std::max_element(options.point_counts.begin(), options.point_counts.end());
    const SeededStarts seeded = seeded_on_path_starts(sys, largest, options.tau0, options.seed);
    const HomotopyTables tables = build_tables(homogenize(seeded.system));

    TrackOptions opts;
    opts.tau0 = options.tau0;
    opts.fixed_step_mode = true;
    opts.fixed_steps = options.fixed_steps;
    opts.newton_max_iters = options.newton_iters;
    opts.skip_start_check = true;
    opts.eval.batch_size = options.batch_size;

    for (std::size_t p : options.point_counts) {
        BenchRow row;
        row.points = p;
        row.backend = std::string(backend.name());
        std::size_t failed = 0;
        try {
            PointBatch start;
            start.y = seeded.starts.y.row_block(0, p);
            start.tau.assign(p, options.tau0);
            std::vector<double> times;
            for (std::size_t r = 0; r < options.repetitions; ++r) {
                const auto t0 = Clock::now();
                const auto results = track_batch(start, tables, opts, backend);
                times.push_back(seconds_since(t0));
                for (const auto& res : results) failed += is_numerical_failure(res.status) ? 1 : 0;
            }
            double mean = 0.0;
            for (double t : times) mean += t;
            mean /= static_cast<double>(times.size());
            double var = 0.0;
            for (double t : times) var += (t - mean) * (t - mean);
            if (times.size() > 1) var /= static_cast<double>(times.size() - 1);
            row.mean_seconds = mean;
            row.std_seconds = std::sqrt(var);
            row.per_point_us = p > 0 ? mean / static_cast<double>(p) * 1e6 : 0.0;
        } catch (const std::bad_alloc&) {
            row.mean_seconds.reset();
            row.std_seconds.reset();
            row.per_point_us.reset();
        }
        out.rows.push_back(std::move(row));
        out.failed_paths.push_back(failed);
    }
    return out;
}

int exit_code_for(const Error& e) {
    static const std::set<std::string> usage{"UsageError"};
    static const std::set<std::string> numerical{"MonomialOverflow", "SingularJacobian", "DegenerateTangent",
                                                 "RankDeficient"};
    if (usage.count(e.kind())) return 1;
    if (numerical.count(e.kind())) return 3;
    return 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Batched polyhedral homotopy evaluation and path tracking", "phg"};
    app.require_subcommand(1);

    CommonArgs a;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", a.out_path, "Output file (default: stdout)");
        sub->add_option("--batch-size", a.batch_size, "Sub-batch size (default: ceil(p/4))")->check(CLI::PositiveNumber);
        sub->add_option("--backend", a.backend, "reference | blocked | external (default: $PHG_BACKEND or reference)");
        sub->add_option("--seed", a.seed, "Random seed");
        sub->add_option("--tau0", a.tau0, "Start value of the path parameter");
    };

    std::string kind;
    int n = 0, m = 0, min_exp = 0, max_exp = 2;
    double chandra_c = 0.51234;
    std::string points_out;
    std::size_t point_count = 1000;
    auto* gen = app.add_subcommand("gen", "Generate a benchmark or random system");
    gen->add_option("kind", kind, "cyclic | chandra | random")->required();
    gen->add_option("--n", n, "Number of variables")->required();
    gen->add_option("--m", m, "Number of monomials (random)");
    gen->add_option("--c", chandra_c, "Chandrasekhar parameter");
    gen->add_option("--min-exp", min_exp, "Smallest exponent (random)");
    gen->add_option("--max-exp", max_exp, "Largest exponent (random)");
    gen->add_option("--points-out", points_out, "Also write seeded on-path start points here");
    gen->add_option("--points", point_count, "Number of start points for --points-out");
    add_common(gen);

    bool check_oracle = false;
    auto* eval = app.add_subcommand("eval", "Evaluate extended Jacobians at a batch of points");
    eval->add_option("--system", a.system_path)->required()->check(CLI::ExistingFile);
    eval->add_option("--points", a.points_path)->required()->check(CLI::ExistingFile);
    eval->add_flag("--check-oracle", check_oracle, "Compare against the scalar oracle");
    add_common(eval);

    std::optional<std::size_t> fixed_steps;
    std::optional<int> newton_iters;
    bool skip_start_check = false;
    auto* track = app.add_subcommand("track", "Track start points to tau = 0");
    track->add_option("--system", a.system_path)->required()->check(CLI::ExistingFile);
    track->add_option("--points", a.points_path)->required()->check(CLI::ExistingFile);
    track->add_option("--fixed-steps", fixed_steps, "Uniform steps, all accepted")->check(CLI::PositiveNumber);
    track->add_option("--newton-iters", newton_iters, "Newton iterations per step")->check(CLI::NonNegativeNumber);
    track->add_flag("--skip-start-check", skip_start_check, "Do not validate start residuals");
    add_common(track);

    BenchOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "Time the fixed-step protocol over several batch sizes");
    bench->add_option("--system", a.system_path)->required()->check(CLI::ExistingFile);
    bench->add_option("--counts", bench_opts.point_counts, "Point counts")->delimiter(',');
    bench->add_option("--repetitions", bench_opts.repetitions, "Runs per point count")->check(CLI::PositiveNumber);
    bench->add_option("--fixed-steps", bench_opts.fixed_steps, "Steps per run")->check(CLI::PositiveNumber);
    bench->add_option("--newton-iters", bench_opts.newton_iters, "Newton iterations per step")
        ->check(CLI::NonNegativeNumber);
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) return cmd_gen(kind, n, m, chandra_c, min_exp, max_exp, a, points_out, point_count, out, err);
        if (*eval) return cmd_eval(a, check_oracle, out, err);
        if (*track) return cmd_track(a, fixed_steps, newton_iters, skip_start_check, out, err);
        if (*bench) return cmd_bench(a, bench_opts, out, err);
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return 3;
    }
    return 1;
}

}  // namespace phg
