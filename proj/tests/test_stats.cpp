#include <doctest.h>

#include <cmath>

#include "bsim/stats.hpp"
#include "support/statcheck.hpp"
#include "support/testutil.hpp"

using namespace bsim;
using namespace bsim::stats;
using engine::BucketVector;
using testutil::Rng;

namespace {

double normal_draw(Rng& rng) {
    double u1 = testutil::uniform01(rng), u2 = testutil::uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct Arm {
    BucketVector num, den;
};

// one unit = one denominator count; values Pareto plus an optional shift
Arm simulate_arm(Rng& rng, uint32_t buckets, uint32_t units, uint64_t shift = 0) {
    Arm arm{BucketVector(buckets), BucketVector(buckets)};
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

double bootstrap_variance(Rng& rng, const BucketVector& num, const BucketVector& den,
                          int resamples) {
    uint32_t buckets = num.size();
    std::vector<double> points;
    points.reserve(size_t(resamples));
    for (int r = 0; r < resamples; ++r) {
        double x = 0, n = 0;
        for (uint32_t b = 0; b < buckets; ++b) {
            uint32_t pick = uint32_t(rng() % buckets);
            x += double(num.sums[pick]);
            n += double(den.sums[pick]);
        }
        points.push_back(x / n);
    }
    double mean = 0;
    for (double p : points) mean += p;
    mean /= double(points.size());
    double var = 0;
    for (double p : points) var += (p - mean) * (p - mean);
    return var / double(points.size() - 1);
}

bool is_psd(const std::vector<std::vector<double>>& a, double tol) {
    // Cholesky of A + tol*scale*I must succeed
    size_t n = a.size();
    double scale = 0;
    for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a[i][i]));
    if (scale == 0) scale = 1;
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0));
    for (size_t j = 0; j < n; ++j) {
        double d = a[j][j] + tol * scale;
        for (size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
        if (d < 0) return false;
        l[j][j] = std::sqrt(d);
        for (size_t i = j + 1; i < n; ++i) {
            double s = a[i][j];
            for (size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = l[j][j] > 0 ? s / l[j][j] : 0;
        }
    }
    return true;
}

} // namespace

TEST_CASE("normal cdf basics") {
    CHECK(normal_cdf(0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-5));
    CHECK(normal_cdf(-6) < 1e-8);
}

TEST_CASE("ratio_estimate") {
    SUBCASE("identical buckets have zero variance") {
        BucketVector num(16), den(16);
        for (uint32_t b = 0; b < 16; ++b) {
            num.sums[b] = 7;
            den.sums[b] = 1;
        }
        MetricEstimate e = ratio_estimate(num, den);
        CHECK(e.point == doctest::Approx(7.0));
        CHECK(e.variance == doctest::Approx(0.0));
        CHECK(e.buckets_used == 16);
    }
    SUBCASE("unit denominators reduce to the mean of units") {
        Rng rng(14001);
        Arm arm = simulate_arm(rng, 64, 5000);
        MetricEstimate e = ratio_estimate(arm.num, arm.den);
        CHECK(e.point == doctest::Approx(double(arm.num.total_sum()) / 5000.0));
    }
    SUBCASE("fixed-point scale unscales point and variance") {
        Rng rng(14002);
        Arm arm = simulate_arm(rng, 64, 2000);
        MetricEstimate raw = ratio_estimate(arm.num, arm.den);
        MetricEstimate scaled = ratio_estimate(arm.num, arm.den, 10.0);
        CHECK(scaled.point == doctest::Approx(raw.point / 10.0));
        CHECK(scaled.variance == doctest::Approx(raw.variance / 100.0));
    }
    SUBCASE("zero denominator is an error") {
        BucketVector num(4), den(4);
        CHECK(testutil::code_of([&] { ratio_estimate(num, den); }) == Errc::UndefinedMetric);
    }
    SUBCASE("delta-method variance within 10% of a bucket bootstrap") {
        Rng rng(14003);
        Arm arm = simulate_arm(rng, 256, 20000);
        MetricEstimate e = ratio_estimate(arm.num, arm.den);
        double boot = bootstrap_variance(rng, arm.num, arm.den, 10000);
        CHECK(e.variance == doctest::Approx(boot).epsilon(0.10));
    }
}

TEST_CASE("diff_test") {
    SUBCASE("A/A identity") {
        MetricEstimate e{3.5, 0.01, 64};
        DeltaResult r = diff_test(e, e);
        CHECK(r.delta == 0);
        CHECK(r.p_value == doctest::Approx(1.0));
        CHECK(r.relative_delta == 0);
    }
    SUBCASE("t = 1.96 gives p near 0.05") {
        MetricEstimate t{1.96, 0.5, 64}, c{0.0, 0.5, 64};
        DeltaResult r = diff_test(t, c);
        CHECK(r.t_stat == doctest::Approx(1.96));
        CHECK(r.p_value == doctest::Approx(0.05).epsilon(1e-3 / 0.05));
    }
    SUBCASE("degenerate test rejected") {
        MetricEstimate t{1.0, 0.0, 64}, c{0.0, 0.0, 64};
        CHECK(testutil::code_of([&] { diff_test(t, c); }) == Errc::DegenerateTest);
        DeltaResult ok = diff_test(c, c); // zero delta with zero variance is fine
        CHECK(ok.t_stat == 0);
        CHECK(ok.p_value == 1);
    }
    SUBCASE("A/A p-values look uniform") {
        Rng rng(14004);
        std::vector<double> pvalues;
        for (int run = 0; run < 150; ++run) {
            Arm t = simulate_arm(rng, 256, 4000);
            Arm c = simulate_arm(rng, 256, 4000);
            DeltaResult r = diff_test(ratio_estimate(t.num, t.den), ratio_estimate(c.num, c.den));
            pvalues.push_back(r.p_value);
        }
        CHECK(statcheck::ks_uniform_pvalue(pvalues) > 0.001);
    }
}

TEST_CASE("cuped") {
    const uint32_t buckets = 256;
    SUBCASE("perfect covariate wipes the variance") {
        Rng rng(14005);
        Arm yt = simulate_arm(rng, buckets, 4000);
        Arm yc = simulate_arm(rng, buckets, 4000);
        DeltaResult plain = diff_test(ratio_estimate(yt.num, yt.den),
                                      ratio_estimate(yc.num, yc.den));
        DeltaResult adj = cuped_adjust({&yt.num, &yt.den}, {&yc.num, &yc.den}, {&yt.num, &yt.den},
                                       {&yc.num, &yc.den});
        CHECK(adj.cuped_applied);
        CHECK(adj.theta == doctest::Approx(1.0));
        CHECK(adj.variance <= 1e-9 * plain.variance);
    }
    SUBCASE("independent covariate changes nothing much") {
        Rng rng(14006);
        double ratio_sum = 0;
        int runs = 30;
        for (int i = 0; i < runs; ++i) {
            Arm yt = simulate_arm(rng, buckets, 4000);
            Arm yc = simulate_arm(rng, buckets, 4000);
            Arm xt = simulate_arm(rng, buckets, 4000);
            Arm xc = simulate_arm(rng, buckets, 4000);
            DeltaResult plain = diff_test(ratio_estimate(yt.num, yt.den),
                                          ratio_estimate(yc.num, yc.den));
            DeltaResult adj = cuped_adjust({&yt.num, &yt.den}, {&yc.num, &yc.den},
                                           {&xt.num, &xt.den}, {&xc.num, &xc.den});
            ratio_sum += adj.variance / plain.variance;
        }
        CHECK(ratio_sum / runs == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("correlation 0.8 cuts variance to about 0.36") {
        Rng rng(14007);
        double ratio_sum = 0;
        int runs = 40;
        for (int i = 0; i < runs; ++i) {
            auto correlated_arm = [&](Arm& y, Arm& x) {
                y = Arm{BucketVector(buckets), BucketVector(buckets)};
                x = Arm{BucketVector(buckets), BucketVector(buckets)};
                for (int u = 0; u < 4000; ++u) {
                    uint32_t b = uint32_t(rng() % buckets);
                    double n1 = normal_draw(rng), n2 = normal_draw(rng);
                    auto xv = uint64_t(std::llround(1000 + 100 * n1));
                    auto yv = uint64_t(std::llround(1000 + 100 * (0.8 * n1 + 0.6 * n2)));
                    x.num.sums[b] += xv;
                    y.num.sums[b] += yv;
                    x.den.sums[b] += 1;
                    y.den.sums[b] += 1;
                }
            };
            Arm yt, xt, yc, xc;
            correlated_arm(yt, xt);
            correlated_arm(yc, xc);
            DeltaResult plain = diff_test(ratio_estimate(yt.num, yt.den),
                                          ratio_estimate(yc.num, yc.den));
            DeltaResult adj = cuped_adjust({&yt.num, &yt.den}, {&yc.num, &yc.den},
                                           {&xt.num, &xt.den}, {&xc.num, &xc.den});
            ratio_sum += adj.variance / plain.variance;
        }
        CHECK(ratio_sum / runs == doctest::Approx(0.36).epsilon(0.10 / 0.36));
    }
    SUBCASE("zero covariate variance falls back, flagged") {
        BucketVector num(8), den(8), x(8);
        for (uint32_t b = 0; b < 8; ++b) {
            num.sums[b] = 1 + b;
            den.sums[b] = 1;
            x.sums[b] = 5; // constant: zero variance
        }
        DeltaResult r = cuped_adjust({&num, &den}, {&num, &den}, {&x, &den}, {&x, &den});
        CHECK(!r.cuped_applied);
        CHECK(r.delta == 0);
    }
    SUBCASE("adjusted variance never beats plain by more than noise") {
        Rng rng(14008);
        for (int i = 0; i < 20; ++i) {
            Arm yt = simulate_arm(rng, buckets, 3000);
            Arm yc = simulate_arm(rng, buckets, 3000);
            Arm xt = simulate_arm(rng, buckets, 3000);
            Arm xc = simulate_arm(rng, buckets, 3000);
            DeltaResult plain = diff_test(ratio_estimate(yt.num, yt.den),
                                          ratio_estimate(yc.num, yc.den));
            DeltaResult adj = cuped_adjust({&yt.num, &yt.den}, {&yc.num, &yc.den},
                                           {&xt.num, &xt.den}, {&xc.num, &xc.den});
            REQUIRE(adj.variance <= plain.variance * 1.05);
        }
    }
}

TEST_CASE("covariance matrix") {
    Rng rng(14009);
    SUBCASE("self covariance equals variance of totals") {
        Arm a = simulate_arm(rng, 128, 5000);
        auto cov = covariance_matrix({&a.num});
        // consistency with the ratio estimator against a count-1 denominator:
        // var(total) = B * S_xx
        BucketVector ones(128);
        for (auto& v : ones.sums) v = 1;
        MetricEstimate e = ratio_estimate(a.num, ones);
        // point = total/128; var(point) = var(total)/128^2
        CHECK(cov[0][0] / (128.0 * 128.0) == doctest::Approx(e.variance).epsilon(1e-9));
    }
    SUBCASE("independent metrics have small correlation") {
        Arm a = simulate_arm(rng, 1024, 40000);
        Arm b = simulate_arm(rng, 1024, 40000);
        auto cov = covariance_matrix({&a.num, &b.num});
        double r = cov[0][1] / std::sqrt(cov[0][0] * cov[1][1]);
        CHECK(std::fabs(r) < 0.1);
    }
    SUBCASE("PSD on random metric sets") {
        for (int iter = 0; iter < 10; ++iter) {
            std::vector<Arm> arms;
            std::vector<const BucketVector*> metrics;
            for (int k = 0; k < 5; ++k) arms.push_back(simulate_arm(rng, 64, 2000));
            for (auto& a : arms) metrics.push_back(&a.num);
            auto cov = covariance_matrix(metrics);
            REQUIRE(is_psd(cov, 1e-9));
        }
    }
    SUBCASE("errors") {
        BucketVector one(1);
        CHECK_THROWS_AS(covariance_matrix({&one}), Error);
        CHECK_THROWS_AS(covariance_matrix({}), Error);
    }
}
