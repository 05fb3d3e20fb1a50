#pragma once

#include "ecoroute/engine.hpp"

#include <string>
#include <vector>

namespace ecoroute {

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

// Linear-interpolation quantile over a sorted copy of the sample
// (position q*(n-1), interpolated between neighbours).
double quantile(std::vector<double> values, double q);
Quartiles quartiles(const std::vector<double>& values);

struct MetricSummary {
    double total = 0.0;
    double mean = 0.0;
    Quartiles quart;
};

struct ScenarioSummary {
    std::string scenario_id;
    std::uint64_t seed = 0;
    int trip_count = 0; // non-warm-up trips
    MetricSummary tt_s;
    MetricSummary vkt_km;
    MetricSummary speed_kmh;
    MetricSummary ghg_g;
    MetricSummary nox_g;
    std::int64_t ghg_ng = 0; // exact totals
    std::int64_t nox_ng = 0;
    std::uint64_t network_hash = 0;
    std::uint64_t demand_hash = 0;
};

// Aggregates non-warm-up trips; throws ValidationError when none remain.
ScenarioSummary summarize(const std::vector<TripRecord>& trips, const std::string& scenario_id);

std::string summary_to_json(const ScenarioSummary& s);
ScenarioSummary summary_from_json(const std::string& text);

// Self-contained special functions (1e-8 accuracy target against reference
// implementations).
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

struct WelchResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
// freedom; two-sided p. Requires n >= 2 per sample and positive variance in
// at least one.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

enum class SeriesMetric { GHG, NOx, MeanSpeed };

struct TimeSeriesPoint {
    int t_start_s = 0;
    int t_end_s = 0;
    double value = 0.0;
    std::int64_t raw_ng = 0; // emissions only; exact reconciliation handle
};

// Network-level per-interval series from the interval log: emission totals
// are production sums (0 when nothing drives), speed is the
// vehicle-second-weighted space mean.
std::vector<TimeSeriesPoint> time_series(const std::vector<IntervalLogRow>& log,
                                         SeriesMetric metric);

enum class HeatmapField { Speed, DensityRatio, GHG };

// One value per link at the requested interval; throws on unknown interval.
std::vector<double> heatmap_values(const std::vector<IntervalLogRow>& log,
                                   int interval_index, HeatmapField field);

struct RasterGrid {
    int width = 0;
    int height = 0;
    double cell_m = 0.0;
    double min_x = 0.0;
    double min_y = 0.0;
    std::vector<double> cells; // row-major, mean of contributing link samples
    std::vector<int> counts;
};

// Requires node coordinates; links are sampled along their straight segment.
RasterGrid rasterize_heatmap(const RoadNetwork& net, const std::vector<double>& link_values,
                             double cell_m);

struct ScenarioTrips {
    std::string scenario_id;
    std::vector<TripRecord> trips; // pooled across seeds, warm-up rows allowed
    std::uint64_t network_hash = 0;
    std::uint64_t demand_hash = 0;
};

struct ComparisonRow {
    std::string scenario_a;
    std::string scenario_b;
    std::string metric; // tt, vkt, speed, ghg, nox
    WelchResult welch;
};

struct PercentRow {
    std::string scenario;
    std::string metric;
    double baseline_mean = 0.0;
    double mean = 0.0;
    double percent_change = 0.0; // vs baseline
};

struct ComparisonReport {
    std::vector<ComparisonRow> tests;     // all scenario pairs
    std::vector<PercentRow> percent;      // each scenario vs baseline
};

// Pairwise Welch tests and percentage changes against a named baseline.
// Refuses groups generated from different network/demand inputs.
ComparisonReport compare_scenarios(const std::vector<ScenarioTrips>& groups,
                                   const std::string& baseline_id);

std::string comparison_to_csv(const ComparisonReport& report);

} // namespace ecoroute
