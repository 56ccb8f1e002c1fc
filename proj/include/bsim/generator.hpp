#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

#include "bsim/codec.hpp"
#include "bsim/reference.hpp"

namespace bsim::gen {

// Synthetic experiment workload: Pareto-shaped metric values, exposure dates
// decaying geometrically from the experiment start, stable per-unit
// dimensions. Byte-deterministic for a given seed.
struct Params {
    uint64_t units = 10000;
    int metrics = 3;
    int days = 7;
    int pre_days = 0; // extra metric-log days before the first exposure
    int strategies = 2;
    double alpha = 1.16;   // Pareto shape
    uint64_t cap = 1000;   // metric value cap; 1 gives a binary metric
    double active_rate = 0.6; // chance a unit emits a metric row on a day
    uint64_t seed = 1;
    int64_t start_date = 19723; // day index of 2024-01-01
    bool with_dimensions = true;
};

uint64_t pareto_value(std::mt19937_64& rng, double alpha, uint64_t cap);

ref::Logs generate_logs(const Params& params);

// TSV columns follow the ingest schemas (expose / metric / dimension logs).
void write_expose_tsv(std::ostream& out, const ref::Logs& logs);
void write_metric_tsv(std::ostream& out, const ref::Logs& logs);
void write_dimension_tsv(std::ostream& out, const ref::Logs& logs);

// Row column for the codec/storage benchmarks: positions 0..n-1 kept with the
// given density, Pareto values.
codec::NormalRows pareto_rows(uint64_t positions, double density, double alpha, uint64_t cap,
                              uint64_t seed);

} // namespace bsim::gen
