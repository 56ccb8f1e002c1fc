#include "bsim/generator.hpp"

#include <cmath>
#include <ostream>

#include "bsim/dates.hpp"

namespace bsim::gen {

namespace {

// uniform in [0,1) from raw engine output; distributions from <random> are
// implementation-defined, which would break byte-identical generation
double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

} // namespace

uint64_t pareto_value(std::mt19937_64& rng, double alpha, uint64_t cap) {
    if (alpha <= 0) throw Error(Errc::InvalidArgument, "pareto alpha must be positive");
    double u = uniform01(rng);
    double x = std::pow(1.0 - u, -1.0 / alpha);
    if (!(x < 1e18)) x = 1e18;
    auto v = uint64_t(std::ceil(x));
    if (v < 1) v = 1;
    return std::min(v, cap);
}

ref::Logs generate_logs(const Params& params) {
    if (params.alpha <= 0) throw Error(Errc::InvalidArgument, "pareto alpha must be positive");
    if (params.days < 1 || params.strategies < 1 || params.metrics < 1)
        throw Error(Errc::InvalidArgument, "days, strategies and metrics must be positive");
    std::mt19937_64 rng(params.seed);
    ref::Logs logs;

    for (uint64_t i = 0; i < params.units; ++i) {
        std::string unit = "u" + std::to_string(i);
        std::string strategy = "s" + std::to_string(rng() % uint64_t(params.strategies));
        // geometric decay: day d with probability 2^-(d+1), clamped to the span
        int day = 0;
        while (day < params.days - 1 && (rng() & 1)) ++day;
        logs.expose.push_back({strategy, unit, unit, params.start_date + day});
    }

    for (int m = 0; m < params.metrics; ++m) {
        std::string metric = "m" + std::to_string(m);
        for (int d = -params.pre_days; d < params.days; ++d) {
            for (uint64_t i = 0; i < params.units; ++i) {
                if (uniform01(rng) >= params.active_rate) continue;
                uint64_t v = pareto_value(rng, params.alpha, params.cap);
                logs.metrics.push_back({metric, params.start_date + d, "u" + std::to_string(i),
                                        std::to_string(v)});
            }
        }
    }

    if (params.with_dimensions) {
        static const char* kClients[] = {"ios", "android", "web"};
        for (uint64_t i = 0; i < params.units; ++i) {
            std::string unit = "u" + std::to_string(i);
            std::string client = kClients[rng() % 3];
            std::string version = std::to_string(100 + rng() % 101);
            for (int d = 0; d < params.days; ++d) {
                logs.dimensions.push_back({"client-type", params.start_date + d, unit, client});
                logs.dimensions.push_back(
                    {"client-version", params.start_date + d, unit, version});
            }
        }
    }
    return logs;
}

void write_expose_tsv(std::ostream& out, const ref::Logs& logs) {
    for (const auto& r : logs.expose)
        out << r.strategy << '\t' << r.unit << '\t' << r.rand_unit << '\t'
            << dates::format_day(r.date) << '\n';
}

void write_metric_tsv(std::ostream& out, const ref::Logs& logs) {
    for (const auto& r : logs.metrics)
        out << dates::format_day(r.date) << '\t' << r.id << '\t' << r.unit << '\t' << r.raw_value
            << '\n';
}

void write_dimension_tsv(std::ostream& out, const ref::Logs& logs) {
    for (const auto& r : logs.dimensions)
        out << dates::format_day(r.date) << '\t' << r.id << '\t' << r.unit << '\t' << r.raw_value
            << '\n';
}

codec::NormalRows pareto_rows(uint64_t positions, double density, double alpha, uint64_t cap,
                              uint64_t seed) {
    std::mt19937_64 rng(seed);
    codec::NormalRows out;
    out.sorted = true;
    out.rows.reserve(size_t(double(positions) * density));
    for (uint64_t p = 0; p < positions; ++p) {
        if (uniform01(rng) >= density) continue;
        out.rows.push_back({uint32_t(p), pareto_value(rng, alpha, cap)});
    }
    return out;
}

} // namespace bsim::gen
