#include "bsim/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "bsim/bench.hpp"
#include "bsim/dates.hpp"
#include "bsim/engine.hpp"
#include "bsim/generator.hpp"
#include "bsim/stats.hpp"
#include "bsim/store.hpp"

namespace bsim::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t p = s.find(sep, start);
        if (p == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, p - start));
        start = p + 1;
    }
}

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n ? int(n) : 1;
}

// --- ingest -----------------------------------------------------------------

struct IngestOptions {
    std::string root;
    std::string kind;
    std::string input;
    std::string priority;
};

[[noreturn]] void line_error(const std::string& file, size_t line, const std::string& what) {
    throw Error(Errc::Malformed, file + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::vector<std::string>> read_tsv(const std::string& path, size_t columns) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line, '\t');
        if (cells.size() != columns)
            line_error(path, lineno,
                       "expected " + std::to_string(columns) + " columns, got " +
                           std::to_string(cells.size()));
        rows.push_back(std::move(cells));
    }
    return rows;
}

int64_t parse_date_cell(const std::string& file, size_t line, const std::string& cell) {
    try {
        return dates::parse_day(cell);
    } catch (const Error& e) {
        line_error(file, line, e.what());
    }
}

int cmd_ingest(const IngestOptions& opt, std::ostream& out) {
    model::Catalog catalog = store::catalog_load(opt.root);
    model::UnitIndex units = store::units_load(opt.root, catalog);

    if (!opt.priority.empty()) {
        std::ifstream in(opt.priority);
        if (!in) throw Error(Errc::IoError, "cannot open " + opt.priority);
        std::vector<std::string> ids;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ids.push_back(line);
        units.preregister(catalog, ids);
        out << "preregistered " << ids.size() << " priority ids\n";
    }

    if (opt.kind == "expose") {
        auto rows = read_tsv(opt.input, 4);
        std::vector<model::ExposeRecord> records;
        records.reserve(rows.size());
        std::set<std::pair<std::string, std::string>> seen;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (!seen.emplace(rows[i][0], rows[i][1]).second)
                line_error(opt.input, i + 1,
                           "duplicate analysis unit '" + rows[i][1] + "' for strategy " +
                               rows[i][0]);
            records.push_back({rows[i][0], rows[i][1], rows[i][2],
                               parse_date_cell(opt.input, i + 1, rows[i][3])});
        }
        if (records.empty()) out << "warning: empty input, nothing written\n";
        model::ExposeTable table = model::build_expose(records, catalog, units);
        for (const auto& [strategy, columns] : table.strategies()) {
            store::write_expose(opt.root, strategy, columns);
            out << "expose/" << strategy << ": " << records.size() << " rows\n";
        }
    } else if (opt.kind == "metric" || opt.kind == "dimension") {
        auto rows = read_tsv(opt.input, 4);
        std::vector<model::ValueRecord> records;
        records.reserve(rows.size());
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (!seen.emplace(rows[i][1], rows[i][0], rows[i][2]).second)
                line_error(opt.input, i + 1,
                           "duplicate record for (" + rows[i][1] + ", " + rows[i][0] + ", " +
                               rows[i][2] + ")");
            records.push_back({rows[i][1], parse_date_cell(opt.input, i + 1, rows[i][0]),
                               rows[i][2], rows[i][3]});
        }
        model::BuildCounters counters;
        model::ValueTable table = opt.kind == "metric"
                                      ? model::build_metric(records, catalog, units, &counters)
                                      : model::build_dimension(records, catalog, units, &counters);
        if (records.empty()) out << "warning: empty input, nothing written\n";
        for (const auto& [key, segments] : table.parts()) {
            store::write_values(opt.root, opt.kind, key.first, key.second, segments);
            out << opt.kind << "/" << store::value_key(key.first, key.second) << " written\n";
        }
        out << "rows ingested: " << counters.rows << ", zero values dropped: "
            << counters.zero_dropped << "\n";
    } else {
        throw Error(Errc::InvalidArgument, "unknown ingest kind " + opt.kind);
    }

    store::units_save(opt.root, units);
    store::catalog_save(opt.root, catalog); // scales/dictionaries may have grown
    return 0;
}

// --- scorecard / deepdive / precompute ------------------------------------------

struct ScorecardOptions {
    std::string root;
    std::string strategy;
    std::string control;
    std::vector<std::string> metrics;
    std::string date;
    std::string to;
    std::string agg = "sum";
    std::string where;
    std::string dim_date;
    int cuped_days = 0;
    int threads = 0;
    bool daily = false;
};

engine::ScoreAgg parse_agg(const std::string& name) {
    if (name == "sum") return engine::ScoreAgg::Sum;
    if (name == "count") return engine::ScoreAgg::Count;
    if (name == "unique") return engine::ScoreAgg::UniqueUnits;
    throw Error(Errc::InvalidArgument, "unknown agg " + name);
}

struct LoadedData {
    model::Catalog catalog;
    model::ExposeTable expose;
    model::MetricTable metrics;
    model::DimensionTable dims;

    engine::Dataset dataset() const { return {&catalog, &expose, &metrics, &dims}; }
};

// Loads everything the query needs, collecting every missing partition into
// one error instead of failing on the first.
LoadedData load_for_query(const ScorecardOptions& opt, const std::vector<int64_t>& dates,
                          const std::vector<int64_t>& pre_dates, int64_t dim_date,
                          const std::vector<std::string>& dim_names) {
    LoadedData data;
    data.catalog = store::catalog_load(opt.root);
    std::vector<std::string> missing;

    std::vector<std::string> strategies = {opt.strategy};
    if (!opt.control.empty()) strategies.push_back(opt.control);
    for (const std::string& s : strategies) {
        if (!store::has_partition(opt.root, "expose", s)) {
            missing.push_back("expose/" + s);
            continue;
        }
        data.expose.put(s, store::read_expose(opt.root, data.catalog, s));
    }

    std::vector<int64_t> all_dates = dates;
    all_dates.insert(all_dates.end(), pre_dates.begin(), pre_dates.end());
    for (const std::string& metric : opt.metrics) {
        for (int64_t d : all_dates) {
            if (!store::has_partition(opt.root, "metric", store::value_key(metric, d))) {
                missing.push_back("metric/" + store::value_key(metric, d));
                continue;
            }
            if (!data.metrics.find(metric, d))
                data.metrics.put(metric, d,
                                 store::read_values(opt.root, data.catalog, "metric", metric, d));
        }
    }

    for (const std::string& name : dim_names) {
        if (!store::has_partition(opt.root, "dimension", store::value_key(name, dim_date))) {
            missing.push_back("dimension/" + store::value_key(name, dim_date));
            continue;
        }
        data.dims.put(name, dim_date,
                      store::read_values(opt.root, data.catalog, "dimension", name, dim_date));
    }

    if (!missing.empty()) {
        std::string list;
        for (const std::string& m : missing) list += "\n  " + m;
        throw Error(Errc::MissingPartition, list);
    }
    return data;
}

int64_t experiment_start(const LoadedData& data, const std::vector<std::string>& strategies) {
    int64_t start = INT64_MAX;
    for (const std::string& s : strategies)
        for (const model::ExposeColumn& col : data.expose.require(s))
            if (!col.offset.empty()) start = std::min(start, col.min_date);
    if (start == INT64_MAX) throw Error(Errc::EmptyInput, "no exposed units");
    return start;
}

void print_header(std::ostream& out, bool with_control) {
    out << "metric\tagg\tdates\tpoint";
    if (with_control) out << "\tcontrol\tdelta\trel_delta\tvariance\tt\tp\tcuped";
    out << "\n";
}

int run_scorecard(const ScorecardOptions& opt, std::ostream& out) {
    if (opt.metrics.empty()) throw Error(Errc::InvalidArgument, "no metrics given");
    if (opt.cuped_days > 0 && opt.control.empty())
        throw Error(Errc::InvalidArgument, "--cuped needs --control");

    int64_t first = dates::parse_day(opt.date);
    int64_t last = opt.to.empty() ? first : dates::parse_day(opt.to);
    if (last < first) throw Error(Errc::InvalidArgument, "--to precedes --date");
    std::vector<int64_t> all_dates;
    for (int64_t d = first; d <= last; ++d) all_dates.push_back(d);

    engine::PredicateExpr where;
    std::vector<std::string> dim_names;
    if (!opt.where.empty()) {
        where = engine::parse_predicate(opt.where);
        for (const auto& clause : where.clauses) dim_names.push_back(clause.name);
    }
    int64_t dim_date = opt.dim_date.empty() ? all_dates.back() : dates::parse_day(opt.dim_date);

    int threads = opt.threads > 0 ? opt.threads : default_threads();

    // pre-period dates resolve after the expose tables are loaded, so load in
    // two steps when CUPED is on
    std::vector<int64_t> pre_dates;
    LoadedData data = load_for_query(opt, all_dates, {}, dim_date, dim_names);
    int64_t expt_start = 0;
    if (opt.cuped_days > 0) {
        expt_start = experiment_start(data, {opt.strategy, opt.control});
        for (int c = 1; c <= opt.cuped_days; ++c) pre_dates.push_back(expt_start - c);
        data = load_for_query(opt, all_dates, pre_dates, dim_date, dim_names);
    }

    std::vector<std::vector<int64_t>> date_groups;
    if (opt.daily) {
        for (int64_t d : all_dates) date_groups.push_back({d});
    } else {
        date_groups.push_back(all_dates);
    }

    engine::PreAggCache preagg_cache(size_t(256) << 20);

    print_header(out, !opt.control.empty());
    for (const std::string& metric : opt.metrics) {
        double scale = double(data.catalog.metric(metric) ? data.catalog.metric(metric)->scale : 1);
        for (const auto& dates_group : date_groups) {
            engine::Query q{opt.strategy, metric, dates_group, parse_agg(opt.agg),
                            opt.where.empty() ? nullptr : &where, dim_date, threads};
            engine::BucketVector t_num = engine::scorecard(data.dataset(), q);
            engine::BucketVector t_den = engine::exposed_units(data.dataset(), q,
                                                               dates_group.back());
            stats::MetricEstimate t_est = stats::ratio_estimate(t_num, t_den, scale);

            std::string date_label = dates::format_day(dates_group.front());
            if (dates_group.size() > 1) date_label += "-" + dates::format_day(dates_group.back());

            if (opt.control.empty()) {
                out << metric << '\t' << opt.agg << '\t' << date_label << '\t' << fmt(t_est.point)
                    << "\n";
                continue;
            }

            engine::Query qc = q;
            qc.strategy = opt.control;
            engine::BucketVector c_num = engine::scorecard(data.dataset(), qc);
            engine::BucketVector c_den = engine::exposed_units(data.dataset(), qc,
                                                               dates_group.back());
            stats::MetricEstimate c_est = stats::ratio_estimate(c_num, c_den, scale);
            stats::DeltaResult r = stats::diff_test(t_est, c_est);

            auto print_row = [&](const stats::DeltaResult& d, const char* tag) {
                out << metric << '\t' << opt.agg << '\t' << date_label << '\t' << fmt(t_est.point)
                    << '\t' << fmt(c_est.point) << '\t' << fmt(d.delta) << '\t'
                    << fmt(d.relative_delta) << '\t' << fmt(d.variance) << '\t' << fmt(d.t_stat)
                    << '\t' << fmt(d.p_value) << '\t' << tag << "\n";
            };
            print_row(r, "-");

            if (opt.cuped_days > 0) {
                int64_t analysis = dates_group.back();
                engine::BucketVector xt = engine::pre_experiment(
                    data.dataset(), q, expt_start, opt.cuped_days, analysis, &preagg_cache);
                engine::BucketVector xt_den = engine::exposed_units(data.dataset(), q, analysis);
                engine::BucketVector xc = engine::pre_experiment(
                    data.dataset(), qc, expt_start, opt.cuped_days, analysis, &preagg_cache);
                engine::BucketVector xc_den = engine::exposed_units(data.dataset(), qc, analysis);
                stats::DeltaResult adj =
                    stats::cuped_adjust({&t_num, &t_den}, {&c_num, &c_den}, {&xt, &xt_den},
                                        {&xc, &xc_den}, scale);
                print_row(adj, adj.cuped_applied ? "cuped" : "cuped-skipped");
            }
        }
    }
    return 0;
}

int cmd_precompute(const ScorecardOptions& opt, std::ostream& out) {
    if (opt.metrics.size() != 1)
        throw Error(Errc::InvalidArgument, "precompute takes exactly one --metrics entry");
    if (opt.cuped_days < 1) throw Error(Errc::InvalidArgument, "--cuped must be >= 1");
    const std::string metric = opt.metrics[0];
    int64_t analysis = dates::parse_day(opt.date);
    int threads = opt.threads > 0 ? opt.threads : default_threads();

    ScorecardOptions probe = opt;
    LoadedData data = load_for_query(probe, {analysis}, {}, analysis, {});
    std::vector<std::string> strategies = {opt.strategy};
    if (!opt.control.empty()) strategies.push_back(opt.control);
    int64_t expt_start = experiment_start(data, strategies);
    std::vector<int64_t> pre_dates;
    for (int c = 1; c <= opt.cuped_days; ++c) pre_dates.push_back(expt_start - c);
    data = load_for_query(probe, {analysis}, pre_dates, analysis, {});

    double scale = double(data.catalog.metric(metric) ? data.catalog.metric(metric)->scale : 1);
    out << "strategy\tmetric\tpre_days\tcovariate_point\tcovariate_variance\tbuckets_used\n";
    for (const std::string& s : strategies) {
        engine::Query q{s, metric, {analysis}, engine::ScoreAgg::Sum, nullptr, -1, threads};
        engine::BucketVector x = engine::pre_experiment(data.dataset(), q, expt_start,
                                                        opt.cuped_days, analysis);
        engine::BucketVector den = engine::exposed_units(data.dataset(), q, analysis);
        stats::MetricEstimate e = stats::ratio_estimate(x, den, scale);
        out << s << '\t' << metric << '\t' << opt.cuped_days << '\t' << fmt(e.point) << '\t'
            << fmt(e.variance) << '\t' << e.buckets_used << "\n";
    }
    return 0;
}

// --- generate --------------------------------------------------------------------

struct GenerateOptions {
    std::string out_dir;
    gen::Params params;
    std::string start_date = "20240101";
    bool no_dimensions = false;
};

int cmd_generate(GenerateOptions opt, std::ostream& out) {
    opt.params.start_date = dates::parse_day(opt.start_date);
    opt.params.with_dimensions = !opt.no_dimensions;
    ref::Logs logs = gen::generate_logs(opt.params);
    fs::create_directories(opt.out_dir);

    auto write = [&](const char* name, auto&& writer) {
        std::ofstream f(fs::path(opt.out_dir) / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Errc::IoError, std::string("cannot write ") + name);
        writer(f);
    };
    write("expose.tsv", [&](std::ostream& f) { gen::write_expose_tsv(f, logs); });
    write("metric.tsv", [&](std::ostream& f) { gen::write_metric_tsv(f, logs); });
    if (opt.params.with_dimensions)
        write("dimension.tsv", [&](std::ostream& f) { gen::write_dimension_tsv(f, logs); });

    out << "expose rows: " << logs.expose.size() << "\n";
    out << "metric rows: " << logs.metrics.size() << "\n";
    if (opt.params.with_dimensions) out << "dimension rows: " << logs.dimensions.size() << "\n";
    return 0;
}

// --- bench -------------------------------------------------------------------------

struct BenchOptions {
    std::string scenario;
    uint64_t units = 1000000;
    double density = 0.6;
    double alpha = 1.16;
    uint64_t cap = 100;
    uint64_t seed = 1;
    int runs = 5;
    std::string out_file;
};

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
    std::ostringstream tsv;
    auto timed_rows = [&](const char* scenario, const char* baseline, const char* candidate,
                          const bench::TimedReport& r) {
        tsv << "scenario\trows\truns\t" << baseline << "_ms\t" << candidate
            << "_ms\tspeedup\tequal\n";
        tsv << scenario << '\t' << r.rows << '\t' << r.runs << '\t' << fmt(r.baseline_ms) << '\t'
            << fmt(r.candidate_ms) << '\t' << fmt(r.speedup) << '\t' << (r.equal ? 1 : 0) << "\n";
        out << scenario << ": " << r.rows << " rows, " << baseline << " " << fmt(r.baseline_ms)
            << " ms vs " << candidate << " " << fmt(r.candidate_ms) << " ms ("
            << fmt(r.speedup) << "x, median of " << r.runs << " runs"
            << (r.equal ? ", answers equal" : ", ANSWERS DIFFER") << ")\n";
    };

    if (opt.scenario == "storage") {
        bench::StorageReport r =
            bench::storage_scenario(opt.units, opt.density, opt.alpha, opt.cap, opt.seed);
        tsv << "scenario\trows\tnormal_bytes\tbsi_bytes\tratio\n";
        tsv << "storage\t" << r.rows << '\t' << r.normal_bytes << '\t' << r.bsi_bytes << '\t'
            << fmt(r.ratio) << "\n";
        out << "storage: " << r.rows << " rows, normal " << r.normal_bytes << " B, BSI "
            << r.bsi_bytes << " B, ratio " << fmt(r.ratio) << "\n";
    } else if (opt.scenario == "compute") {
        timed_rows("compute", "normal", "bsi",
                   bench::compute_scenario(opt.units, opt.density, opt.alpha, opt.cap, opt.seed,
                                           opt.runs));
    } else if (opt.scenario == "encode") {
        timed_rows("encode", "straightforward", "presorted",
                   bench::encode_scenario(opt.units, opt.density, opt.alpha, opt.cap, opt.seed,
                                          opt.runs));
    } else if (opt.scenario == "decode") {
        timed_rows("decode", "straightforward", "per_bitmap",
                   bench::decode_scenario(opt.units, opt.density, opt.alpha, opt.cap, opt.seed,
                                          opt.runs));
    } else if (opt.scenario == "scorecard") {
        gen::Params params;
        params.units = opt.units;
        params.seed = opt.seed;
        params.alpha = opt.alpha;
        params.cap = opt.cap;
        params.active_rate = opt.density;
        timed_rows("scorecard", "reference", "engine",
                   bench::scorecard_scenario(params, opt.runs));
    } else {
        throw Error(Errc::InvalidArgument, "unknown scenario " + opt.scenario);
    }

    if (!opt.out_file.empty()) {
        std::ofstream f(opt.out_file, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Errc::IoError, "cannot write " + opt.out_file);
        f << tsv.str();
        out << "tsv written to " << opt.out_file << "\n";
    }
    return 0;
}

// --- inspect -----------------------------------------------------------------------

void print_bsi_stats(std::ostream& out, const std::string& label, const Bsi& value) {
    size_t arrays = 0, bitsets = 0, bytes = value.serialize().size();
    for (int i = 0; i < value.slice_count(); ++i) {
        for (const auto& entry : value.slice(i).entries())
            (entry.container.is_bitset() ? bitsets : arrays)++;
    }
    out << label << ": slices " << value.slice_count() << ", count " << value.count() << ", sum "
        << value.sum() << ", containers " << arrays << " array / " << bitsets << " bitset, bytes "
        << bytes << "\n";
    for (int i = 0; i < value.slice_count(); ++i)
        out << "  slice " << i << ": cardinality " << value.slice(i).cardinality() << "\n";
}

struct InspectOptions {
    std::string path;
    std::string root;
    std::string kind;
    std::string key;
};

int cmd_inspect(const InspectOptions& opt, std::ostream& out) {
    auto inspect_block = [&](const std::string& label, std::span<const uint8_t> bytes) {
        try {
            Bsi value = store::decode_value_block(bytes);
            print_bsi_stats(out, label, value);
        } catch (const Error&) {
            model::ExposeColumn col = store::decode_expose_block(bytes);
            out << label << ": expose block, min date " << dates::format_day(col.min_date) << "\n";
            print_bsi_stats(out, label + " offset", col.offset);
            print_bsi_stats(out, label + " bucket", col.bucket);
        }
    };

    if (!opt.path.empty()) {
        std::ifstream in(opt.path, std::ios::binary);
        if (!in) throw Error(Errc::IoError, "cannot open " + opt.path);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string bytes = ss.str();
        inspect_block(opt.path, {reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()});
        return 0;
    }
    if (opt.root.empty() || opt.kind.empty() || opt.key.empty())
        throw Error(Errc::InvalidArgument, "inspect needs --path or --root/--kind/--key");
    store::Partition p = store::read_partition(opt.root, opt.kind, opt.key);
    for (uint32_t s = 0; s < p.blocks.size(); ++s) {
        if (p.blocks[s].empty()) continue;
        inspect_block("segment " + std::to_string(s), p.blocks[s]);
    }
    return 0;
}

// --- config file ----------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open config " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(Errc::Malformed, "config line without tab: " + line);
        pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return pairs;
}

} // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"experiment analytics over bit-sliced indexes"};
    app.require_subcommand(0, 1);

    std::string config_path;
    app.add_option("--config", config_path, "TSV key-value defaults for the subcommand");

    // init
    std::string root;
    uint32_t segments = 1024, buckets = 1024;
    bool shared_units = false;
    std::vector<std::string> metric_defs, dimension_defs;
    CLI::App* init = app.add_subcommand("init", "create a catalog root");
    init->add_option("--root", root, "catalog root directory")->envname("BSIMETRICS_ROOT");
    init->add_option("--segments", segments, "segment count (fixed at creation)");
    init->add_option("--buckets", buckets, "bucket count (fixed at creation)");
    init->add_flag("--shared-units", shared_units,
                   "randomization unit = analysis unit: bucketing reuses segmentation");
    init->add_option("--metric", metric_defs, "metric registration id=scale (repeatable)");
    init->add_option("--dimension", dimension_defs,
                     "dimension registration name=categorical|numeric (repeatable)");

    // ingest
    IngestOptions ingest_opt;
    CLI::App* ingest = app.add_subcommand("ingest", "load a TSV log into the catalog");
    ingest->add_option("--root", ingest_opt.root, "catalog root")->envname("BSIMETRICS_ROOT");
    ingest->add_option("--kind", ingest_opt.kind, "expose | metric | dimension")->required();
    ingest->add_option("--input", ingest_opt.input, "TSV file")->required();
    ingest->add_option("--priority", ingest_opt.priority,
                       "unit ids, one per line, encoded to the smallest positions first");

    // scorecard / deepdive / precompute share options
    auto add_query_options = [](CLI::App* cmd, ScorecardOptions& o, bool where_required) {
        cmd->add_option("--root", o.root, "catalog root")->envname("BSIMETRICS_ROOT");
        cmd->add_option("--strategy", o.strategy, "treatment strategy id")->required();
        cmd->add_option("--control", o.control, "control strategy id");
        cmd->add_option("--metrics", o.metrics, "metric ids")->required()->delimiter(',');
        cmd->add_option("--date", o.date, "analysis date YYYYMMDD")->required();
        cmd->add_option("--to", o.to, "range end YYYYMMDD (inclusive)");
        cmd->add_option("--agg", o.agg, "sum | count | unique");
        auto* where = cmd->add_option("--where", o.where, "dimension predicate");
        if (where_required) where->required();
        cmd->add_option("--dim-date", o.dim_date, "dimension snapshot date (default: last date)");
        cmd->add_option("--cuped", o.cuped_days, "pre-period days for variance reduction");
        cmd->add_option("--threads", o.threads, "worker threads (default: cores)");
    };

    ScorecardOptions score_opt;
    CLI::App* score = app.add_subcommand("scorecard", "metric movements with inference");
    add_query_options(score, score_opt, false);

    ScorecardOptions deep_opt;
    CLI::App* deepdive = app.add_subcommand("deepdive", "dimension-filtered scorecards");
    add_query_options(deepdive, deep_opt, true);
    deepdive->add_flag("--daily", deep_opt.daily, "one row per day instead of one aggregate");

    ScorecardOptions pre_opt;
    CLI::App* precompute = app.add_subcommand("precompute", "pre-experiment covariates");
    add_query_options(precompute, pre_opt, false);

    // generate
    GenerateOptions gen_opt;
    CLI::App* generate = app.add_subcommand("generate", "synthetic experiment logs");
    generate->add_option("--out", gen_opt.out_dir, "output directory")->required();
    generate->add_option("--units", gen_opt.params.units, "analysis units");
    generate->add_option("--metrics", gen_opt.params.metrics, "metric count");
    generate->add_option("--days", gen_opt.params.days, "day count");
    generate->add_option("--pre-days", gen_opt.params.pre_days,
                         "extra metric-log days before the first exposure");
    generate->add_option("--strategies", gen_opt.params.strategies, "strategy count");
    generate->add_option("--alpha", gen_opt.params.alpha, "Pareto shape");
    generate->add_option("--cap", gen_opt.params.cap, "value cap (1 = binary metric)");
    generate->add_option("--active-rate", gen_opt.params.active_rate,
                         "per-day chance of a metric row");
    generate->add_option("--seed", gen_opt.params.seed, "rng seed (mandatory)")->required();
    generate->add_option("--start", gen_opt.start_date, "first date YYYYMMDD");
    generate->add_flag("--no-dimensions", gen_opt.no_dimensions, "skip dimension logs");

    // bench
    BenchOptions bench_opt;
    CLI::App* bench_cmd = app.add_subcommand("bench", "row format vs BSI comparisons");
    bench_cmd->add_option("--scenario", bench_opt.scenario,
                          "storage | compute | encode | decode | scorecard")
        ->required();
    bench_cmd->add_option("--units", bench_opt.units, "positions / units");
    bench_cmd->add_option("--density", bench_opt.density, "fill rate of the position space");
    bench_cmd->add_option("--alpha", bench_opt.alpha, "Pareto shape");
    bench_cmd->add_option("--cap", bench_opt.cap, "value cap");
    bench_cmd->add_option("--seed", bench_opt.seed, "rng seed");
    bench_cmd->add_option("--runs", bench_opt.runs, "timed runs after one warm-up");
    bench_cmd->add_option("--out", bench_opt.out_file, "write machine-readable TSV here");

    // inspect
    InspectOptions inspect_opt;
    CLI::App* inspect = app.add_subcommand("inspect", "partition / block statistics");
    inspect->add_option("--path", inspect_opt.path, "one .bsi block file");
    inspect->add_option("--root", inspect_opt.root, "catalog root")->envname("BSIMETRICS_ROOT");
    inspect->add_option("--kind", inspect_opt.kind, "expose | metric | dimension");
    inspect->add_option("--key", inspect_opt.key, "partition key");

    for (CLI::App* sub : app.get_subcommands({}))
        sub->add_option("--config", config_path, "TSV key-value defaults");

    // inject config defaults for options the chosen subcommand has but the
    // command line does not
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        std::string config_file;
        for (size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--config") config_file = args[i + 1];
        if (!config_file.empty()) {
            CLI::App* sub = app.get_subcommand_no_throw(args[0]);
            if (sub) {
                for (auto& [key, value] : read_config(config_file)) {
                    std::string flag = "--" + key;
                    if (!sub->get_option_no_throw(flag)) continue;
                    bool present = false;
                    for (const std::string& a : args)
                        if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
                    if (!present) {
                        args.push_back(flag);
                        args.push_back(value);
                    }
                }
            }
        }
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        std::vector<CLI::App*> parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed[0]->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (init->parsed()) {
            if (root.empty()) throw Error(Errc::InvalidArgument, "--root required");
            model::Catalog catalog(segments, buckets, shared_units);
            for (const std::string& def : metric_defs) {
                auto kv = split(def, '=');
                if (kv.size() != 2) throw Error(Errc::InvalidArgument, "--metric wants id=scale");
                catalog.register_metric(kv[0], std::stoull(kv[1]));
            }
            for (const std::string& def : dimension_defs) {
                auto kv = split(def, '=');
                if (kv.size() != 2 || (kv[1] != "categorical" && kv[1] != "numeric"))
                    throw Error(Errc::InvalidArgument,
                                "--dimension wants name=categorical|numeric");
                catalog.register_dimension(kv[0], kv[1] == "categorical");
            }
            store::init_root(root, catalog);
            out << "catalog created at " << root << " (" << segments << " segments, " << buckets
                << " buckets" << (shared_units ? ", shared units" : "") << ")\n";
            return 0;
        }
        if (ingest->parsed()) {
            if (ingest_opt.root.empty()) throw Error(Errc::InvalidArgument, "--root required");
            return cmd_ingest(ingest_opt, out);
        }
        if (score->parsed()) {
            if (score_opt.root.empty()) throw Error(Errc::InvalidArgument, "--root required");
            return run_scorecard(score_opt, out);
        }
        if (deepdive->parsed()) {
            if (deep_opt.root.empty()) throw Error(Errc::InvalidArgument, "--root required");
            return run_scorecard(deep_opt, out);
        }
        if (precompute->parsed()) {
            if (pre_opt.root.empty()) throw Error(Errc::InvalidArgument, "--root required");
            if (pre_opt.cuped_days == 0) pre_opt.cuped_days = 7;
            return cmd_precompute(pre_opt, out);
        }
        if (generate->parsed()) return cmd_generate(gen_opt, out);
        if (bench_cmd->parsed()) return cmd_bench(bench_opt, out);
        if (inspect->parsed()) return cmd_inspect(inspect_opt, out);
        out << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace bsim::cli
