#include "bsim/stats.hpp"

#include <cmath>

namespace bsim::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Per-arm moments of one ratio metric over bucket replicates.
struct RatioMoments {
    double point = 0;      // X / N
    double variance = 0;   // Var(point)
    double n_total = 0;    // N
    uint32_t buckets_used = 0;
    std::vector<double> residuals; // u_b = x_b - m * n_b (linearization)
    double bucket_count = 0;
};

double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
    size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / double(n - 1);
}

RatioMoments ratio_moments(const engine::BucketVector& num, const engine::BucketVector& den) {
    if (num.size() != den.size() || num.size() < 2)
        throw Error(Errc::InvalidArgument, "bucket vectors must align and hold >= 2 buckets");
    uint64_t x_total = num.total_sum();
    uint64_t n_total = den.total_sum();
    if (n_total == 0) throw Error(Errc::UndefinedMetric, "denominator sums to zero");

    RatioMoments out;
    out.bucket_count = double(num.size());
    out.n_total = double(n_total);
    out.point = double(x_total) / double(n_total);
    out.residuals.resize(num.size());
    for (uint32_t b = 0; b < num.size(); ++b) {
        out.residuals[b] = double(num.sums[b]) - out.point * double(den.sums[b]);
        if (den.sums[b] > 0) ++out.buckets_used;
    }
    double s_uu = sample_cov(out.residuals, out.residuals);
    out.variance = out.bucket_count / (out.n_total * out.n_total) * s_uu;
    return out;
}

DeltaResult finish_test(double delta, double variance, double control_point) {
    DeltaResult r;
    r.delta = delta;
    r.variance = variance;
    r.relative_delta = control_point != 0 ? delta / control_point : 0;
    if (variance < 0) variance = 0;
    if (variance == 0) {
        if (delta != 0) throw Error(Errc::DegenerateTest, "zero variance with nonzero delta");
        r.t_stat = 0;
        r.p_value = 1;
        return r;
    }
    r.t_stat = delta / std::sqrt(variance);
    r.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(r.t_stat)));
    return r;
}

} // namespace

MetricEstimate ratio_estimate(const engine::BucketVector& num, const engine::BucketVector& den,
                              double scale) {
    RatioMoments m = ratio_moments(num, den);
    return MetricEstimate{m.point / scale, m.variance / (scale * scale), m.buckets_used};
}

DeltaResult diff_test(const MetricEstimate& treatment, const MetricEstimate& control) {
    if (!std::isfinite(treatment.point) || !std::isfinite(control.point) ||
        !std::isfinite(treatment.variance) || !std::isfinite(control.variance))
        throw Error(Errc::InvalidArgument, "estimates must be finite");
    return finish_test(treatment.point - control.point, treatment.variance + control.variance,
                       control.point);
}

DeltaResult cuped_adjust(RatioVector y_t, RatioVector y_c, RatioVector x_t, RatioVector x_c,
                         double scale) {
    RatioMoments yt = ratio_moments(*y_t.num, *y_t.den);
    RatioMoments yc = ratio_moments(*y_c.num, *y_c.den);
    RatioMoments xt = ratio_moments(*x_t.num, *x_t.den);
    RatioMoments xc = ratio_moments(*x_c.num, *x_c.den);

    // covariance of the linearized ratio estimates within each arm
    double cov_t = yt.bucket_count / (yt.n_total * xt.n_total) *
                   sample_cov(yt.residuals, xt.residuals);
    double cov_c = yc.bucket_count / (yc.n_total * xc.n_total) *
                   sample_cov(yc.residuals, xc.residuals);
    double var_x = xt.variance + xc.variance;

    double raw_delta = yt.point - yc.point;
    double raw_var = yt.variance + yc.variance;
    if (var_x <= 0) {
        DeltaResult r = finish_test(raw_delta / scale, raw_var / (scale * scale),
                                    yc.point / scale);
        r.cuped_applied = false;
        return r;
    }
    double theta = (cov_t + cov_c) / var_x;
    double delta = raw_delta - theta * (xt.point - xc.point);
    double variance = raw_var - 2 * theta * (cov_t + cov_c) + theta * theta * var_x;
    DeltaResult r = finish_test(delta / scale, variance / (scale * scale), yc.point / scale);
    r.cuped_applied = true;
    r.theta = theta;
    return r;
}

std::vector<std::vector<double>> covariance_matrix(
    const std::vector<const engine::BucketVector*>& metrics) {
    if (metrics.empty()) throw Error(Errc::EmptyInput, "no metrics");
    uint32_t buckets = metrics[0]->size();
    if (buckets < 2) throw Error(Errc::InvalidArgument, "need >= 2 buckets");
    for (const auto* m : metrics)
        if (m->size() != buckets) throw Error(Errc::InvalidArgument, "bucket count mismatch");

    size_t k = metrics.size();
    std::vector<std::vector<double>> totals(k, std::vector<double>(buckets));
    for (size_t i = 0; i < k; ++i)
        for (uint32_t b = 0; b < buckets; ++b) totals[i][b] = double(metrics[i]->sums[b]);

    std::vector<std::vector<double>> cov(k, std::vector<double>(k));
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i; j < k; ++j)
            cov[i][j] = cov[j][i] = double(buckets) * sample_cov(totals[i], totals[j]);
    return cov;
}

} // namespace bsim::stats
