// Acceptance suite: one criterion per function, each printing a PASS/FAIL
// line with the measured numbers. Run with no arguments for all criteria or
// with a criterion number to run one.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "bsim/bench.hpp"
#include "bsim/codec.hpp"
#include "bsim/engine.hpp"
#include "bsim/generator.hpp"
#include "bsim/reference.hpp"
#include "bsim/stats.hpp"
#include "support/statcheck.hpp"
#include "support/testutil.hpp"

using namespace bsim;
using testutil::Rng;
using testutil::ValueMap;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

// ---------------------------------------------------------------------------
// 1. BSI kernel oracle equivalence
// ---------------------------------------------------------------------------

bool cmp_eval(uint64_t a, uint64_t b, CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return a < b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
    }
    return false;
}

Bitmap cmp_oracle(const ValueMap& x, const ValueMap& y, CmpOp op, CmpMode mode) {
    Bitmap out;
    std::set<uint32_t> keys;
    for (auto& [k, _] : x) keys.insert(k);
    for (auto& [k, _] : y) keys.insert(k);
    for (uint32_t k : keys) {
        uint64_t a = x.count(k) ? x.at(k) : 0;
        uint64_t b = y.count(k) ? y.at(k) : 0;
        bool in = mode == CmpMode::Strict ? (a != 0 && b != 0 && cmp_eval(a, b, op))
                                          : cmp_eval(a, b, op);
        if (in) out.add(k);
    }
    return out;
}

bool criterion_1(std::ostream& out) {
    const int kCases = 10000;
    Rng rng(101);
    Check c;
    const CmpOp kOps[] = {CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne};

    for (int iter = 0; iter < kCases && c.ok; ++iter) {
        // alternate Pareto values with uniform [0, 2^20) to stress wide slices
        bool pareto = iter % 2 == 0;
        size_t nx = 1 + rng() % 60, ny = 1 + rng() % 60;
        ValueMap xm = testutil::random_value_map(rng, nx, 512, pareto, 1 << 20);
        ValueMap ym = testutil::random_value_map(rng, ny, 512, pareto, 1 << 20);
        Bsi x = testutil::to_bsi(xm), y = testutil::to_bsi(ym);

        // add
        c.expect(bsi_add(x, y) == testutil::to_bsi(testutil::combine(
                                      xm, ym, [](uint64_t a, uint64_t b) { return a + b; })),
                 "add mismatch");
        // subtract on y' <= x
        ValueMap ym2;
        for (auto& [p, v] : xm)
            if (rng() % 2) ym2[p] = rng() % (v + 1);
        c.expect(bsi_subtract(x, testutil::to_bsi(ym2)) ==
                     testutil::to_bsi(testutil::combine(
                         xm, ym2, [](uint64_t a, uint64_t b) { return a - b; })),
                 "subtract mismatch");
        // multiply, bounded to keep products in range
        ValueMap xs, ys;
        for (auto& [p, v] : xm) xs[p] = v % 65536;
        for (auto& [p, v] : ym) ys[p] = v % 65536;
        c.expect(bsi_multiply(testutil::to_bsi(xs), testutil::to_bsi(ys)) ==
                     testutil::to_bsi(testutil::combine(
                         xs, ys, [](uint64_t a, uint64_t b) { return a * b; })),
                 "multiply mismatch");
        // binary multiply
        ValueMap mask;
        for (auto& [p, _] : ym)
            if (rng() % 2) mask[p] = 1;
        c.expect(bsi_multiply_binary(x, BinaryBsi::from_bsi(testutil::to_bsi(mask))) ==
                     testutil::to_bsi(testutil::combine(
                         xm, mask, [](uint64_t a, uint64_t b) { return a * b; })),
                 "binary multiply mismatch");
        // comparisons, both modes
        for (CmpOp op : kOps) {
            c.expect(bsi_compare(x, y, op, CmpMode::Strict).bits() ==
                         cmp_oracle(xm, ym, op, CmpMode::Strict),
                     "strict compare mismatch");
            c.expect(bsi_compare(x, y, op, CmpMode::Total).bits() ==
                         cmp_oracle(xm, ym, op, CmpMode::Total),
                     "total compare mismatch");
        }
        // scalar comparison and scalar addition
        uint64_t k = pareto ? rng() % 64 : rng() % (1 << 20);
        for (CmpOp op : kOps) {
            Bitmap expect;
            for (auto& [p, v] : xm)
                if (cmp_eval(v, k, op)) expect.add(p);
            c.expect(bsi_compare_scalar(x, op, k).bits() == expect, "scalar compare mismatch");
        }
        c.expect(bsi_add_scalar(x, k) == testutil::to_bsi([&] {
                     ValueMap m = xm;
                     for (auto& [p, v] : m) v += k;
                     return m;
                 }()),
                 "scalar add mismatch");
        // in-BSI aggregates
        uint64_t sum = 0, mn = UINT64_MAX, mx = 0;
        for (auto& [p, v] : xm) {
            sum += v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        c.expect(x.sum() == sum && x.count() == xm.size() && x.min_value() == mn &&
                     x.max_value() == mx,
                 "fold aggregate mismatch");
        // BSI-to-BSI aggregates
        ValueMap zm = testutil::random_value_map(rng, 1 + rng() % 40, 512, pareto, 1 << 16);
        std::vector<Bsi> inputs = {x, y, testutil::to_bsi(zm)};
        auto fold = [&](const std::function<uint64_t(uint64_t, uint64_t)>& f) {
            return testutil::to_bsi(
                testutil::combine(testutil::combine(xm, ym, f), zm, f));
        };
        c.expect(bsi_agg(BsiAgg::Sum, inputs) ==
                     fold([](uint64_t a, uint64_t b) { return a + b; }),
                 "sumBSI mismatch");
        c.expect(bsi_agg(BsiAgg::Max, inputs) ==
                     fold([](uint64_t a, uint64_t b) { return std::max(a, b); }),
                 "maxBSI mismatch");
        c.expect(bsi_distinct_pos(inputs).bits() ==
                     (x.nonzero() | y.nonzero() | inputs[2].nonzero()),
                 "distinctPos mismatch");
    }
    out << "(" << kCases << " randomized cases per op family" << (c.ok ? "" : "; " + c.detail)
        << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 2. Comparison algorithm fidelity on the exhaustive 3-bit grid
// ---------------------------------------------------------------------------

bool criterion_2(std::ostream& out) {
    // position 8a+b holds X=a, Y=b for every pair (a,b) in [0,7]^2
    std::vector<std::pair<uint32_t, uint64_t>> xp, yp;
    for (uint32_t a = 0; a < 8; ++a) {
        for (uint32_t b = 0; b < 8; ++b) {
            uint32_t pos = a * 8 + b;
            if (a) xp.emplace_back(pos, a);
            if (b) yp.emplace_back(pos, b);
        }
    }
    Bsi x = Bsi::from_pairs(xp), y = Bsi::from_pairs(yp);
    Bitmap lt = bsi_compare(x, y, CmpOp::Lt, CmpMode::Strict).bits();
    Bitmap eq = bsi_compare(x, y, CmpOp::Eq, CmpMode::Strict).bits();
    Bitmap ne = bsi_compare(x, y, CmpOp::Ne, CmpMode::Strict).bits();

    Check c;
    for (uint32_t a = 0; a < 8; ++a) {
        for (uint32_t b = 0; b < 8; ++b) {
            uint32_t pos = a * 8 + b;
            bool both = a != 0 && b != 0;
            c.expect(lt.contains(pos) == (both && a < b),
                     "LT wrong at (" + std::to_string(a) + "," + std::to_string(b) + ")");
            c.expect(eq.contains(pos) == (both && a == b),
                     "EQ wrong at (" + std::to_string(a) + "," + std::to_string(b) + ")");
            c.expect(ne.contains(pos) == (both && a != b),
                     "NE wrong at (" + std::to_string(a) + "," + std::to_string(b) + ")");
        }
    }
    out << "(64 value pairs, LT/EQ/NE" << (c.ok ? "" : "; " + c.detail) << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 3. Codec equivalence and round trips
// ---------------------------------------------------------------------------

bool criterion_3(std::ostream& out) {
    const int kCases = 10000;
    Rng rng(103);
    Check c;
    for (int iter = 0; iter < kCases && c.ok; ++iter) {
        size_t n = iter % 100 == 0 ? 3000 + rng() % 8000 : rng() % 120;
        ValueMap m = testutil::random_value_map(rng, std::max<size_t>(n, 1), 3 << 16,
                                                iter % 2 == 0, 1 << 18);
        codec::NormalRows rows;
        rows.sorted = true;
        for (auto& [p, v] : m) rows.rows.push_back({p, v});

        Bsi a = codec::encode_straightforward(rows);
        Bsi b = codec::encode_presorted(rows);
        c.expect(a == b && a.serialize() == b.serialize(), "encode methods differ");

        // random mask including positions absent from the BSI
        Bitmap mask;
        for (auto& [p, _] : m) {
            if (rng() % 2) mask.add(p);
            if (rng() % 8 == 0) mask.add(p + 1 + uint32_t(rng() % 50));
        }
        codec::NormalRows d1 = codec::decode_straightforward(a, mask);
        codec::NormalRows d2 = codec::decode_per_bitmap(a, mask);
        c.expect(d1.rows == d2.rows, "decode methods differ");

        codec::NormalRows full = codec::decode_per_bitmap(a, a.nonzero());
        c.expect(full.rows == rows.rows, "decode(encode) not identity");
        c.expect(codec::encode_presorted(full) == a, "encode(decode) not identity");
    }
    out << "(" << kCases << " cases" << (c.ok ? "" : "; " + c.detail) << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 4. End-to-end scorecard equivalence against the row-based reference
// ---------------------------------------------------------------------------

struct Workload {
    model::Catalog catalog;
    model::UnitIndex units;
    model::ExposeTable expose;
    model::MetricTable metrics;
    model::DimensionTable dims;
    ref::Logs logs;

    Workload(const gen::Params& params, uint32_t segments, uint32_t buckets)
        : catalog(segments, buckets, false), units(segments) {
        if (params.with_dimensions) {
            catalog.register_dimension("client-type", true);
            catalog.register_dimension("client-version", false);
        }
        logs = gen::generate_logs(params);
        expose = model::build_expose(logs.expose, catalog, units);
        metrics = model::build_metric(logs.metrics, catalog, units);
        if (params.with_dimensions) dims = model::build_dimension(logs.dimensions, catalog, units);
    }

    engine::Dataset dataset() const { return {&catalog, &expose, &metrics, &dims}; }
};

bool criterion_4(std::ostream& out) {
    gen::Params params;
    params.units = 20000;
    params.metrics = 5;
    params.days = 7;
    params.pre_days = 3;
    params.strategies = 3;
    params.seed = 104;
    Workload w(params, 8, 1024);
    ref::Engine oracle(w.logs, w.catalog);
    engine::Dataset data = w.dataset();

    std::vector<int64_t> week;
    for (int d = 0; d < params.days; ++d) week.push_back(params.start_date + d);
    Check c;
    int checked = 0;

    for (int s = 0; s < params.strategies && c.ok; ++s) {
        std::string strategy = "s" + std::to_string(s);
        for (int m = 0; m < params.metrics && c.ok; ++m) {
            std::string metric = "m" + std::to_string(m);
            for (engine::ScoreAgg agg :
                 {engine::ScoreAgg::Sum, engine::ScoreAgg::Count, engine::ScoreAgg::UniqueUnits}) {
                engine::Query q{strategy, metric, {params.start_date + 3}, agg, nullptr, -1, 2};
                c.expect(engine::scorecard(data, q) ==
                             oracle.scorecard(strategy, metric, q.dates, agg),
                         "single-day scorecard mismatch " + strategy + "/" + metric);
                ++checked;
            }
            for (engine::ScoreAgg agg : {engine::ScoreAgg::Sum, engine::ScoreAgg::UniqueUnits}) {
                engine::Query q{strategy, metric, week, agg, nullptr, -1, 2};
                c.expect(engine::scorecard(data, q) ==
                             oracle.scorecard(strategy, metric, week, agg),
                         "multi-day scorecard mismatch " + strategy + "/" + metric);
                ++checked;
            }
        }
    }

    // deep dive with the dimension filter, all strategies
    engine::PredicateExpr where =
        engine::parse_predicate("client-type = 'ios' AND client-version > 134");
    auto bound = engine::bind_predicate(where, w.catalog);
    for (int s = 0; s < params.strategies && c.ok; ++s) {
        std::string strategy = "s" + std::to_string(s);
        engine::Query q{strategy, "m1", week, engine::ScoreAgg::Sum, &where, -1, 2};
        c.expect(engine::scorecard(data, q) ==
                     oracle.scorecard(strategy, "m1", week, engine::ScoreAgg::Sum, bound,
                                      week.back()),
                 "deep-dive mismatch " + strategy);
        ++checked;
    }

    // pre-experiment covariates
    for (int s = 0; s < params.strategies && c.ok; ++s) {
        std::string strategy = "s" + std::to_string(s);
        engine::Query q{strategy, "m0", {week.back()}, engine::ScoreAgg::Sum, nullptr, -1, 2};
        c.expect(engine::pre_experiment(data, q, params.start_date, params.pre_days,
                                        week.back()) ==
                     oracle.pre_experiment(strategy, "m0", params.start_date, params.pre_days,
                                           week.back()),
                 "pre-experiment mismatch " + strategy);
        ++checked;
    }

    // exposed-unit denominators
    engine::Query qd{"s0", "m0", {week.back()}, engine::ScoreAgg::Sum, nullptr, -1, 2};
    c.expect(engine::exposed_units(data, qd, week.back()) ==
                 oracle.exposed_units("s0", week.back()),
             "exposed-units mismatch");
    ++checked;

    // full-1024-segment smoke case
    if (c.ok) {
        gen::Params smoke;
        smoke.units = 20000;
        smoke.metrics = 1;
        smoke.days = 2;
        smoke.strategies = 2;
        smoke.seed = 1040;
        smoke.with_dimensions = false;
        Workload ws(smoke, 1024, 1024);
        ref::Engine so(ws.logs, ws.catalog);
        engine::Query q{"s0", "m0", {smoke.start_date + 1}, engine::ScoreAgg::Sum, nullptr, -1, 2};
        c.expect(engine::scorecard(ws.dataset(), q) ==
                     so.scorecard("s0", "m0", q.dates, engine::ScoreAgg::Sum),
                 "1024-segment smoke mismatch");
        ++checked;
    }

    out << "(" << params.units << " units, 8 segments + one 1024-segment case, " << checked
        << " query equivalences" << (c.ok ? "" : "; " + c.detail) << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 5. Pre-aggregate tree shape and correctness
// ---------------------------------------------------------------------------

bool criterion_5(std::ostream& out) {
    Check c;

    auto nodes = engine::preagg_decompose(7, 1, 7);
    c.expect(nodes == std::vector<std::pair<int, int>>{{2, 0}, {1, 2}, {0, 6}},
             "1-7 over 7 days did not merge {1-4},{5-6},{7}");

    // node-count bound for every range at every span up to 64
    for (int n = 1; n <= 64 && c.ok; ++n) {
        int bound = std::max(2 * int(std::ceil(std::log2(double(std::max(n, 2))))), 1);
        for (int lo = 1; lo <= n; ++lo) {
            for (int hi = lo; hi <= n; ++hi) {
                auto parts = engine::preagg_decompose(n, lo, hi);
                c.expect(int(parts.size()) <= bound, "node count over bound at n=" +
                                                         std::to_string(n));
                int pos = lo;
                for (auto [k, j] : parts) {
                    c.expect(j * (1 << k) + 1 == pos && pos + (1 << k) - 1 <= hi,
                             "bad tiling at n=" + std::to_string(n));
                    pos += 1 << k;
                }
                c.expect(pos == hi + 1, "range not covered at n=" + std::to_string(n));
            }
        }
    }

    // every range over real BSI trees equals the direct fold, spans up to 64
    Rng rng(105);
    std::vector<std::vector<Bsi>> leaves; // one segment per leaf vector
    for (int d = 0; d < 64; ++d) {
        ValueMap m = testutil::random_value_map(rng, 150, 2048, true, 1000);
        leaves.push_back({testutil::to_bsi(m)});
    }
    for (int n : {7, 13, 32, 64}) {
        if (!c.ok) break;
        engine::PreAggTree tree(1, n, BsiAgg::Sum,
                                std::vector<std::vector<Bsi>>(leaves.begin(),
                                                              leaves.begin() + n));
        for (int lo = 1; lo <= n && c.ok; ++lo) {
            for (int hi = lo; hi <= n; ++hi) {
                std::vector<Bsi> days;
                for (int d = lo; d <= hi; ++d) days.push_back(leaves[size_t(d - 1)][0]);
                if (!(tree.query(lo, hi)[0] == bsi_agg(BsiAgg::Sum, days))) {
                    c.expect(false, "tree query != direct fold at n=" + std::to_string(n));
                    break;
                }
            }
        }
    }
    out << "(canonical {1-4},{5-6},{7}; all ranges n<=64" << (c.ok ? "" : "; " + c.detail) << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 6. Statistical acceptance: A/A uniformity, CI coverage, CUPED, bootstrap
// ---------------------------------------------------------------------------

struct SimArm {
    engine::BucketVector num, den;
};

SimArm simulate_arm(Rng& rng, uint32_t buckets, uint32_t units, uint64_t shift) {
    SimArm arm{engine::BucketVector(buckets), engine::BucketVector(buckets)};
    for (uint32_t i = 0; i < units; ++i) {
        uint32_t b = uint32_t(rng() % buckets);
        uint64_t v = testutil::pareto_value(rng, 1.16, 1000) + shift;
        arm.num.sums[b] += v;
        arm.num.counts[b] += 1;
        arm.den.sums[b] += 1;
        arm.den.counts[b] += 1;
    }
    return arm;
}

double normal_draw(Rng& rng) {
    double u1 = testutil::uniform01(rng), u2 = testutil::uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool criterion_6(std::ostream& out) {
    Check c;
    const uint32_t kBuckets = 1024;
    const int kRuns = 500;

    // (a) A/A p-value uniformity and CI coverage with a known effect
    Rng rng(106);
    std::vector<double> pvalues;
    int covered = 0;
    const uint64_t kEffect = 5;
    for (int run = 0; run < kRuns; ++run) {
        SimArm t = simulate_arm(rng, kBuckets, 10000, 0);
        SimArm ctrl = simulate_arm(rng, kBuckets, 10000, 0);
        stats::DeltaResult aa = stats::diff_test(stats::ratio_estimate(t.num, t.den),
                                                 stats::ratio_estimate(ctrl.num, ctrl.den));
        pvalues.push_back(aa.p_value);

        SimArm t2 = simulate_arm(rng, kBuckets, 10000, kEffect);
        SimArm c2 = simulate_arm(rng, kBuckets, 10000, 0);
        stats::DeltaResult ab = stats::diff_test(stats::ratio_estimate(t2.num, t2.den),
                                                 stats::ratio_estimate(c2.num, c2.den));
        double half = 1.959964 * std::sqrt(ab.variance);
        if (std::fabs(ab.delta - double(kEffect)) <= half) ++covered;
    }
    double ks_p = statcheck::ks_uniform_pvalue(pvalues);
    double coverage = double(covered) / kRuns;
    c.expect(ks_p > 0.001, "A/A p-values not uniform (KS p = " + std::to_string(ks_p) + ")");
    c.expect(coverage >= 0.93 && coverage <= 0.97,
             "coverage " + std::to_string(coverage) + " outside [0.93, 0.97]");

    // (b) CUPED with pre/post correlation 0.8
    double ratio_sum = 0;
    const int kCupedRuns = 60;
    for (int run = 0; run < kCupedRuns; ++run) {
        auto correlated = [&](SimArm& y, SimArm& x) {
            y = SimArm{engine::BucketVector(kBuckets), engine::BucketVector(kBuckets)};
            x = SimArm{engine::BucketVector(kBuckets), engine::BucketVector(kBuckets)};
            for (int u = 0; u < 10000; ++u) {
                uint32_t b = uint32_t(rng() % kBuckets);
                double n1 = normal_draw(rng), n2 = normal_draw(rng);
                auto xv = uint64_t(std::llround(1000 + 100 * n1));
                auto yv = uint64_t(std::llround(1000 + 100 * (0.8 * n1 + 0.6 * n2)));
                x.num.sums[b] += xv;
                y.num.sums[b] += yv;
                x.den.sums[b] += 1;
                y.den.sums[b] += 1;
            }
        };
        SimArm yt, xt, yc, xc;
        correlated(yt, xt);
        correlated(yc, xc);
        stats::DeltaResult plain = stats::diff_test(stats::ratio_estimate(yt.num, yt.den),
                                                    stats::ratio_estimate(yc.num, yc.den));
        stats::DeltaResult adj = stats::cuped_adjust({&yt.num, &yt.den}, {&yc.num, &yc.den},
                                                     {&xt.num, &xt.den}, {&xc.num, &xc.den});
        ratio_sum += adj.variance / plain.variance;
    }
    double cuped_ratio = ratio_sum / kCupedRuns;
    c.expect(std::fabs(cuped_ratio - 0.36) <= 0.10,
             "CUPED variance ratio " + std::to_string(cuped_ratio) + " not 0.36 +- 0.10");

    // (c) delta-method variance against a 1e4-resample bucket bootstrap
    SimArm arm = simulate_arm(rng, kBuckets, 40000, 0);
    stats::MetricEstimate est = stats::ratio_estimate(arm.num, arm.den);
    std::vector<double> points;
    points.reserve(10000);
    for (int r = 0; r < 10000; ++r) {
        double x = 0, n = 0;
        for (uint32_t b = 0; b < kBuckets; ++b) {
            uint32_t pick = uint32_t(rng() % kBuckets);
            x += double(arm.num.sums[pick]);
            n += double(arm.den.sums[pick]);
        }
        points.push_back(x / n);
    }
    double mean = 0;
    for (double p : points) mean += p;
    mean /= double(points.size());
    double boot = 0;
    for (double p : points) boot += (p - mean) * (p - mean);
    boot /= double(points.size() - 1);
    c.expect(std::fabs(est.variance - boot) <= 0.10 * boot,
             "delta-method variance " + std::to_string(est.variance) + " vs bootstrap " +
                 std::to_string(boot));

    out << "(KS p=" << ks_p << ", coverage=" << coverage << ", cuped ratio=" << cuped_ratio
        << ", var vs bootstrap " << est.variance << "/" << boot
        << (c.ok ? "" : "; " + c.detail) << ")";
    return c.ok;
}

// ---------------------------------------------------------------------------
// 7-9. Storage and speed directions at desk scale
// ---------------------------------------------------------------------------

bool criterion_7(std::ostream& out) {
    bench::StorageReport r = bench::storage_scenario(1000000, 0.6, 1.16, 100, 107);
    out << "(" << r.rows << " rows, BSI " << r.bsi_bytes << " B vs normal " << r.normal_bytes
        << " B, ratio " << r.ratio << ", bound 0.5)";
    return r.ratio <= 0.5;
}

bool criterion_8(std::ostream& out) {
    bench::TimedReport r = bench::compute_scenario(1000000, 0.6, 1.16, 100, 108, 5);
    out << "(" << r.rows << " rows, hash " << r.baseline_ms << " ms vs sumBSI " << r.candidate_ms
        << " ms, speedup " << r.speedup << "x, bound 2x, equal=" << (r.equal ? "yes" : "NO")
        << ")";
    return r.equal && r.speedup >= 2.0;
}

bool criterion_9(std::ostream& out) {
    // metric-A-like: dense positions, value range <= 1
    bench::TimedReport r = bench::decode_scenario(1000000, 0.9, 1.16, 1, 109, 5);
    out << "(" << r.rows << " rows, straightforward " << r.baseline_ms << " ms vs per-bitmap "
        << r.candidate_ms << " ms, speedup " << r.speedup << "x, bound 2x, equal="
        << (r.equal ? "yes" : "NO") << ")";
    return r.equal && r.speedup >= 2.0;
}

// ---------------------------------------------------------------------------
// 10. RMSE identity
// ---------------------------------------------------------------------------

bool criterion_10(std::ostream& out) {
    Rng rng(110);
    std::vector<std::pair<uint32_t, uint64_t>> pairs;
    long double sum = 0, sum2 = 0;
    for (uint32_t p = 0; p < 10000; ++p) {
        if (rng() % 5 == 0) continue;
        uint64_t v = testutil::pareto_value(rng, 1.16, 20000);
        pairs.emplace_back(p, v);
        sum += v;
        sum2 += (long double)(v) * v;
    }
    long double n = pairs.size();
    double oracle = double(sum2 / n - (sum / n) * (sum / n));

    Bsi v = Bsi::from_pairs(pairs);
    double cnt = double(bsi_compare_scalar(v, CmpOp::Gt, 0).bits().cardinality());
    double mean = double(v.sum()) / cnt;
    double got = double(bsi_multiply(v, v).sum()) / cnt - mean * mean;

    double rel = std::fabs(got - oracle) / oracle;
    out << "(" << pairs.size() << " rows, BSI " << got << " vs oracle " << oracle
        << ", rel err " << rel << ", bound 1e-12)";
    return rel <= 1e-12;
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* title;
    bool (*fn)(std::ostream&);
};

const Criterion kCriteria[] = {
    {1, "BSI kernel oracle equivalence", criterion_1},
    {2, "comparison algorithm fidelity on the 3-bit grid", criterion_2},
    {3, "codec equivalence and round trips", criterion_3},
    {4, "end-to-end scorecard equivalence", criterion_4},
    {5, "pre-aggregate tree shape and folds", criterion_5},
    {6, "statistical acceptance (A/A, coverage, CUPED, bootstrap)", criterion_6},
    {7, "storage: BSI bytes <= 0.5x normal rows", criterion_7},
    {8, "compute: two-day sumBSI >= 2x hash aggregation", criterion_8},
    {9, "decode: per-bitmap >= 2x straightforward", criterion_9},
    {10, "RMSE identity through BSI operators", criterion_10},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const Criterion& criterion : kCriteria) {
        if (only && criterion.id != only) continue;
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = criterion.fn(detail);
        } catch (const std::exception& e) {
            detail << "(exception: " << e.what() << ")";
        }
        std::cout << (ok ? "PASS" : "FAIL") << " [" << criterion.id << "] " << criterion.title
                  << " " << detail.str() << std::endl;
        if (!ok) ++failures;
    }
    return failures;
}
