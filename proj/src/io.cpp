#include "phg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_locate.hpp"

namespace phg {

using json = nlohmann::json;

namespace {

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto pos = detail::position_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(std::string("malformed JSON: ") + e.what(), pos.line, pos.column);
    }
}

[[noreturn]] void bad_document(std::string_view text, const std::vector<std::string>& path, const std::string& what) {
    detail::JsonLocator locator(text);
    const auto pos = detail::position_of_offset(text, locator.locate(path));
    std::string where;
    for (const auto& p : path) where += "/" + p;
    throw ParseError(what + " at " + (where.empty() ? "/" : where), pos.line, pos.column);
}

json complex_json(Complex v) { return json::array({v.real(), v.imag()}); }

json complex_row_json(std::span<const Complex> row) {
    json out = json::array();
    for (const auto& v : row) out.push_back(complex_json(v));
    return out;
}

// Reads a [re, im] pair; `path` locates it for error messages.
Complex complex_from(std::string_view text, const json& v, const std::vector<std::string>& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        bad_document(text, path, "expected a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Complex> complex_row_from(std::string_view text, const json& v, const std::vector<std::string>& path) {
    if (!v.is_array()) bad_document(text, path, "expected an array of [re, im] pairs");
    std::vector<Complex> out;
    for (std::size_t j = 0; j < v.size(); ++j) {
        auto p = path;
        p.push_back(std::to_string(j));
        out.push_back(complex_from(text, v[j], p));
    }
    return out;
}

// JSON has no infinity; non-finite reals are written as null.
json real_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& v) {
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    return v.get<double>();
}

}  // namespace

PointBatch parse_points(std::string_view text, std::size_t N) {
    const json doc = parse_json(text);
    if (!doc.is_object()) bad_document(text, {}, "expected a JSON object");
    if (!doc.contains("tau0") || !doc["tau0"].is_number()) bad_document(text, {"tau0"}, "expected a number 'tau0'");
    if (!doc.contains("points") || !doc["points"].is_array()) bad_document(text, {"points"}, "expected an array 'points'");
    const double tau0 = doc["tau0"].get<double>();
    const json& pts = doc["points"];

    ComplexMatrix y(pts.size(), N);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto row = complex_row_from(text, pts[i], {"points", std::to_string(i)});
        if (row.size() == N) {
            std::copy(row.begin(), row.end(), y.row(i).begin());
        } else if (row.size() + 1 == N) {
            std::copy(row.begin(), row.end(), y.row(i).begin());
            y(i, N - 1) = 1.0;
        } else {
            throw ShapeError("point " + std::to_string(i) + " has " + std::to_string(row.size()) +
                             " coordinates, system needs " + std::to_string(N) + " (homogeneous) or " +
                             std::to_string(N - 1) + " (affine)");
        }
    }
    return make_point_batch(std::move(y), std::vector<double>(pts.size(), tau0));
}

std::string serialize_points(const ComplexMatrix& y, double tau0) {
    std::ostringstream os;
    os << "{\n  \"tau0\": " << json(tau0).dump() << ",\n  \"points\": [";
    for (std::size_t i = 0; i < y.rows(); ++i) os << (i ? ",\n    " : "\n    ") << complex_row_json(y.row(i)).dump();
    os << (y.rows() ? "\n  ]\n}\n" : "]\n}\n");
    return os.str();
}

EvalReport make_eval_report(const ExtendedJacobianBatch& jac) {
    EvalReport r;
    r.equations = jac.equations;
    r.variables = jac.variables;
    for (std::size_t i = 0; i < jac.size(); ++i) r.blocks.push_back(jac.block(i));
    return r;
}

std::string serialize_eval_report(const EvalReport& report) {
    std::ostringstream os;
    os << "{\n  \"equations\": " << report.equations << ",\n  \"variables\": " << report.variables;
    if (report.oracle_max_rel_dev) os << ",\n  \"oracle_max_rel_dev\": " << json(*report.oracle_max_rel_dev).dump();
    os << ",\n  \"blocks\": [";
    for (std::size_t i = 0; i < report.blocks.size(); ++i) {
        json rows = json::array();
        for (std::size_t k = 0; k < report.blocks[i].rows(); ++k) rows.push_back(complex_row_json(report.blocks[i].row(k)));
        os << (i ? ",\n    " : "\n    ") << rows.dump();
    }
    os << (report.blocks.empty() ? "]\n}\n" : "\n  ]\n}\n");
    return os.str();
}

EvalReport parse_eval_report(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) bad_document(text, {}, "expected a JSON object");
    for (const char* key : {"equations", "variables"})
        if (!doc.contains(key) || !doc[key].is_number_unsigned()) bad_document(text, {key}, "expected a count");
    if (!doc.contains("blocks") || !doc["blocks"].is_array()) bad_document(text, {"blocks"}, "expected an array");
    EvalReport r;
    r.equations = doc["equations"].get<std::size_t>();
    r.variables = doc["variables"].get<std::size_t>();
    if (doc.contains("oracle_max_rel_dev")) r.oracle_max_rel_dev = doc["oracle_max_rel_dev"].get<double>();
    const json& blocks = doc["blocks"];
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!blocks[i].is_array() || blocks[i].size() != r.equations)
            bad_document(text, {"blocks", std::to_string(i)}, "block has the wrong number of rows");
        ComplexMatrix b(r.equations, r.variables + 2);
        for (std::size_t k = 0; k < r.equations; ++k) {
            const auto row = complex_row_from(text, blocks[i][k], {"blocks", std::to_string(i), std::to_string(k)});
            if (row.size() != r.variables + 2)
                bad_document(text, {"blocks", std::to_string(i), std::to_string(k)}, "block row has the wrong length");
            std::copy(row.begin(), row.end(), b.row(k).begin());
        }
        r.blocks.push_back(std::move(b));
    }
    return r;
}

TrackSummary summarize(const std::vector<TrackResult>& results, double wall_seconds) {
    TrackSummary s;
    s.paths = results.size();
    s.wall_seconds = wall_seconds;
    for (const auto& r : results) ++s.counts[std::string(to_string(r.status))];
    return s;
}

std::string serialize_track_results(const std::vector<TrackResult>& results, const TrackSummary& summary) {
    std::string out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        json line = {
            {"index", i},
            {"status", std::string(to_string(r.status))},
            {"tau", r.tau},
            {"y", complex_row_json(r.y)},
            {"at_infinity", r.at_infinity},
            {"residual", real_json(r.residual)},
            {"steps", r.steps_taken},
            {"newton_iters", r.newton_iters_total},
        };
        line["x"] = r.at_infinity ? json(nullptr) : complex_row_json(r.x);
        out += line.dump() + "\n";
    }
    json s = {{"paths", summary.paths}, {"counts", summary.counts}, {"wall_seconds", summary.wall_seconds}};
    out += json{{"summary", s}}.dump() + "\n";
    return out;
}

TrackReport parse_track_results(std::string_view text) {
    TrackReport report;
    bool have_summary = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        if (have_summary) throw ParseError("content after the summary line", line_no, 1);

        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no, e.byte == 0 ? 1 : e.byte);
        }
        try {
            if (doc.contains("summary")) {
                const json& s = doc["summary"];
                report.summary.paths = s.at("paths").get<std::size_t>();
                report.summary.counts = s.at("counts").get<std::map<std::string, std::size_t>>();
                report.summary.wall_seconds = s.at("wall_seconds").get<double>();
                have_summary = true;
                continue;
            }
            TrackResult r;
            r.status = path_status_from_string(doc.at("status").get<std::string>());
            r.tau = doc.at("tau").get<double>();
            for (const auto& v : doc.at("y")) r.y.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            r.at_infinity = doc.at("at_infinity").get<bool>();
            if (!doc.at("x").is_null())
                for (const auto& v : doc.at("x")) r.x.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            r.residual = real_from(doc.at("residual"));
            r.steps_taken = doc.at("steps").get<std::size_t>();
            r.newton_iters_total = doc.at("newton_iters").get<std::size_t>();
            report.results.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad track record: ") + e.what(), line_no, 1);
        } catch (const UsageError& e) {
            throw ParseError(e.what(), line_no, 1);
        }
    }
    if (!have_summary) throw ParseError("missing summary line", line_no + 1, 1);
    if (report.summary.paths != report.results.size())
        throw ParseError("summary counts " + std::to_string(report.summary.paths) + " paths but " +
                             std::to_string(report.results.size()) + " records were read",
                         line_no, 1);
    return report;
}

namespace {

std::string csv_number(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

std::optional<double> csv_parse_number(std::string_view field, std::size_t line) {
    if (field == "-") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("expected a number or '-' in bench CSV, got '" + std::string(field) + "'", line, 1);
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string serialize_bench_csv(const std::vector<BenchRow>& rows) {
    std::string out(bench_csv_header);
    out += "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.points) + "," + csv_number(r.mean_seconds) + "," + csv_number(r.std_seconds) + "," +
               csv_number(r.per_point_us) + "," + r.backend + "\n";
    }
    return out;
}

std::vector<BenchRow> parse_bench_csv(std::string_view text) {
    std::vector<BenchRow> rows;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = false;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header) {
            if (line != bench_csv_header) throw ParseError("unexpected bench CSV header", line_no, 1);
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 5) throw ParseError("bench CSV rows have 5 fields", line_no, 1);
        BenchRow r;
        const auto pts = csv_parse_number(f[0], line_no);
        if (!pts || *pts < 0 || *pts != std::floor(*pts)) throw ParseError("bad point count", line_no, 1);
        r.points = static_cast<std::size_t>(*pts);
        r.mean_seconds = csv_parse_number(f[1], line_no);
        r.std_seconds = csv_parse_number(f[2], line_no);
        r.per_point_us = csv_parse_number(f[3], line_no);
        r.backend = std::string(f[4]);
        rows.push_back(std::move(r));
    }
    if (!header) throw ParseError("missing bench CSV header", 1, 1);
    return rows;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
    if (!out) throw UsageError("failed writing '" + path + "'");
}

}  // namespace phg
