#pragma once

#include <cstdint>
#include <vector>

#include "bsim/engine.hpp"

namespace bsim::stats {

double normal_cdf(double x);

// Ratio-metric point estimate with delta-method variance over bucket
// replicates.
struct MetricEstimate {
    double point = 0;
    double variance = 0;
    uint32_t buckets_used = 0; // buckets with a nonzero denominator
};

struct DeltaResult {
    double delta = 0;
    double variance = 0;
    double t_stat = 0;
    double p_value = 1;
    double relative_delta = 0;
    bool cuped_applied = false;
    double theta = 0; // covariate coefficient when CUPED ran
};

// point = sum(num) / sum(den), computed on integer totals and divided once.
// Variance: (B/N^2) * (S_xx - 2m*S_xn + m^2*S_nn) over per-bucket totals.
// `scale` is the metric's fixed-point factor; outputs are unscaled here at
// the boundary.
MetricEstimate ratio_estimate(const engine::BucketVector& num, const engine::BucketVector& den,
                              double scale = 1.0);

// Two-sample z test on independent strategies: delta = pT - pC, variance
// summed, two-sided normal p-value.
DeltaResult diff_test(const MetricEstimate& treatment, const MetricEstimate& control);

// One ratio metric of an arm: numerator and denominator bucket vectors.
struct RatioVector {
    const engine::BucketVector* num;
    const engine::BucketVector* den;
};

// Variance-reduced delta: theta = Cov(Y,X)/Var(X) pooled over both arms'
// bucket replicates; adjusted delta = (yT - yC) - theta * (xT - xC). Falls
// back to the plain test (cuped_applied = false) when Var(X) is zero.
DeltaResult cuped_adjust(RatioVector y_t, RatioVector y_c, RatioVector x_t, RatioVector x_c,
                         double scale = 1.0);

// Totals-level covariance of metrics: B * sample covariance of per-bucket
// sums. Symmetric positive semidefinite.
std::vector<std::vector<double>> covariance_matrix(
    const std::vector<const engine::BucketVector*>& metrics);

} // namespace bsim::stats
