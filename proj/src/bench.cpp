#include "bsim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "bsim/engine.hpp"

namespace bsim::bench {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

template <class F>
double time_ms(F&& f) {
    auto start = Clock::now();
    f();
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Times two competing implementations with interleaved runs so allocator
// and cache history stay symmetric; one warm-up pair, then the median of
// `runs` timed pairs.
template <class A, class B>
std::pair<double, double> timed_pair(int runs, A&& baseline, B&& candidate) {
    baseline();
    candidate();
    std::vector<double> at, bt;
    at.reserve(size_t(runs));
    bt.reserve(size_t(runs));
    for (int i = 0; i < runs; ++i) {
        at.push_back(time_ms(baseline));
        bt.push_back(time_ms(candidate));
    }
    return {median(std::move(at)), median(std::move(bt))};
}

} // namespace

StorageReport storage_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                               uint64_t seed) {
    codec::NormalRows rows = gen::pareto_rows(positions, density, alpha, cap, seed);
    Bsi bsi = codec::encode_presorted(rows);
    StorageReport r;
    r.rows = rows.rows.size();
    r.normal_bytes = uint64_t(rows.rows.size()) * 12; // u32 position + u64 value
    r.bsi_bytes = bsi.serialize().size();
    r.ratio = double(r.bsi_bytes) / double(r.normal_bytes);
    return r;
}

TimedReport compute_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                             uint64_t seed, int runs) {
    codec::NormalRows day1 = gen::pareto_rows(positions, density, alpha, cap, seed);
    codec::NormalRows day2 = gen::pareto_rows(positions, density, alpha, cap, seed + 1);
    Bsi bsi1 = codec::encode_presorted(day1);
    Bsi bsi2 = codec::encode_presorted(day2);

    TimedReport r;
    r.rows = day1.rows.size() + day2.rows.size();
    r.runs = runs;

    std::unordered_map<uint32_t, uint64_t> grouped;
    Bsi total;
    std::tie(r.baseline_ms, r.candidate_ms) = timed_pair(
        runs,
        [&] {
            grouped.clear();
            grouped.reserve(day1.rows.size() + day2.rows.size());
            for (const auto& row : day1.rows) grouped[row.position] += row.value;
            for (const auto& row : day2.rows) grouped[row.position] += row.value;
        },
        [&] { total = bsi_add(bsi1, bsi2); });
    r.speedup = r.baseline_ms / r.candidate_ms;

    codec::NormalRows decoded = codec::decode_per_bitmap(total, total.nonzero());
    r.equal = decoded.rows.size() == grouped.size();
    for (const auto& row : decoded.rows) {
        auto it = grouped.find(row.position);
        if (it == grouped.end() || it->second != row.value) {
            r.equal = false;
            break;
        }
    }
    return r;
}

TimedReport encode_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                            uint64_t seed, int runs) {
    codec::NormalRows rows = gen::pareto_rows(positions, density, alpha, cap, seed);
    TimedReport r;
    r.rows = rows.rows.size();
    r.runs = runs;

    Bsi a, b;
    std::tie(r.baseline_ms, r.candidate_ms) =
        timed_pair(runs, [&] { a = codec::encode_straightforward(rows); },
                   [&] { b = codec::encode_presorted(rows); });
    r.speedup = r.baseline_ms / r.candidate_ms;
    r.equal = a == b && a.serialize() == b.serialize();
    return r;
}

TimedReport decode_scenario(uint64_t positions, double density, double alpha, uint64_t cap,
                            uint64_t seed, int runs) {
    codec::NormalRows rows = gen::pareto_rows(positions, density, alpha, cap, seed);
    Bsi bsi = codec::encode_presorted(rows);
    Bitmap mask = bsi.nonzero();

    TimedReport r;
    r.rows = rows.rows.size();
    r.runs = runs;

    // output buffers live across runs so the timing covers the decode work,
    // not the allocator
    codec::NormalRows a, b;
    std::tie(r.baseline_ms, r.candidate_ms) =
        timed_pair(runs, [&] { codec::decode_straightforward(bsi, mask, a); },
                   [&] { codec::decode_per_bitmap(bsi, mask, b); });
    r.speedup = r.baseline_ms / r.candidate_ms;
    r.equal = a.rows == b.rows && a.rows == rows.rows;
    return r;
}

TimedReport scorecard_scenario(const gen::Params& params, int runs) {
    model::Catalog catalog(8, 64, false);
    model::UnitIndex units(8);
    gen::Params p = params;
    p.with_dimensions = false;
    ref::Logs logs = gen::generate_logs(p);
    model::ExposeTable expose = model::build_expose(logs.expose, catalog, units);
    model::MetricTable metrics = model::build_metric(logs.metrics, catalog, units);
    engine::Dataset data{&catalog, &expose, &metrics, nullptr};
    ref::Engine reference(logs, catalog);

    std::vector<int64_t> dates;
    for (int d = 0; d < p.days; ++d) dates.push_back(p.start_date + d);
    engine::Query query{"s0", "m0", dates, engine::ScoreAgg::Sum, nullptr, -1, 1};

    TimedReport r;
    r.rows = logs.metrics.size();
    r.runs = runs;

    engine::BucketVector ref_result, engine_result;
    std::tie(r.baseline_ms, r.candidate_ms) = timed_pair(
        runs, [&] { ref_result = reference.scorecard("s0", "m0", dates, query.agg); },
        [&] { engine_result = engine::scorecard(data, query); });
    r.speedup = r.baseline_ms / r.candidate_ms;
    r.equal = ref_result == engine_result;
    return r;
}

} // namespace bsim::bench
