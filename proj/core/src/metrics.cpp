#include "ecoroute/metrics.hpp"

#include "ecoroute/csvio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace ecoroute {

using nlohmann::json;

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values) {
    Quartiles q;
    q.q1 = quantile(values, 0.25);
    q.median = quantile(values, 0.5);
    q.q3 = quantile(values, 0.75);
    return q;
}

namespace {

MetricSummary metric_summary(const std::vector<double>& values) {
    MetricSummary m;
    for (double v : values) m.total += v;
    m.mean = m.total / static_cast<double>(values.size());
    m.quart = quartiles(values);
    return m;
}

std::vector<double> metric_values(const std::vector<TripRecord>& trips,
                                  const std::string& metric) {
    std::vector<double> out;
    out.reserve(trips.size());
    for (const auto& t : trips) {
        if (t.warmup) continue;
        if (metric == "tt") out.push_back(t.tt_s);
        else if (metric == "vkt") out.push_back(t.vkt_km);
        else if (metric == "speed") out.push_back(t.mean_speed_kmh);
        else if (metric == "ghg") out.push_back(t.ghg_g());
        else if (metric == "nox") out.push_back(t.nox_g());
        else throw ValidationError("unknown metric: " + metric);
    }
    return out;
}

} // namespace

ScenarioSummary summarize(const std::vector<TripRecord>& trips, const std::string& scenario_id) {
    ScenarioSummary s;
    s.scenario_id = scenario_id;
    std::vector<double> tt, vkt, speed, ghg, nox;
    for (const auto& t : trips) {
        if (t.warmup) continue;
        tt.push_back(t.tt_s);
        vkt.push_back(t.vkt_km);
        speed.push_back(t.mean_speed_kmh);
        ghg.push_back(t.ghg_g());
        nox.push_back(t.nox_g());
        s.ghg_ng += t.ghg_ng;
        s.nox_ng += t.nox_ng;
        ++s.trip_count;
    }
    if (s.trip_count == 0)
        throw ValidationError("summarize: no non-warm-up trips");
    s.tt_s = metric_summary(tt);
    s.vkt_km = metric_summary(vkt);
    s.speed_kmh = metric_summary(speed);
    s.ghg_g = metric_summary(ghg);
    s.nox_g = metric_summary(nox);
    return s;
}

namespace {

json metric_to_json(const MetricSummary& m) {
    json j;
    j["total"] = m.total;
    j["mean"] = m.mean;
    j["q1"] = m.quart.q1;
    j["median"] = m.quart.median;
    j["q3"] = m.quart.q3;
    return j;
}

MetricSummary metric_from_json(const json& j) {
    MetricSummary m;
    m.total = j.at("total").get<double>();
    m.mean = j.at("mean").get<double>();
    m.quart.q1 = j.at("q1").get<double>();
    m.quart.median = j.at("median").get<double>();
    m.quart.q3 = j.at("q3").get<double>();
    return m;
}

} // namespace

std::string summary_to_json(const ScenarioSummary& s) {
    json j;
    j["scenario_id"] = s.scenario_id;
    j["seed"] = s.seed;
    j["trip_count"] = s.trip_count;
    j["tt_s"] = metric_to_json(s.tt_s);
    j["vkt_km"] = metric_to_json(s.vkt_km);
    j["speed_kmh"] = metric_to_json(s.speed_kmh);
    j["ghg_g"] = metric_to_json(s.ghg_g);
    j["nox_g"] = metric_to_json(s.nox_g);
    j["ghg_ng"] = s.ghg_ng;
    j["nox_ng"] = s.nox_ng;
    j["network_hash"] = s.network_hash;
    j["demand_hash"] = s.demand_hash;
    return j.dump(2) + "\n";
}

ScenarioSummary summary_from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioSummary s;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.trip_count = j.at("trip_count").get<int>();
    s.tt_s = metric_from_json(j.at("tt_s"));
    s.vkt_km = metric_from_json(j.at("vkt_km"));
    s.speed_kmh = metric_from_json(j.at("speed_kmh"));
    s.ghg_g = metric_from_json(j.at("ghg_g"));
    s.nox_g = metric_from_json(j.at("nox_g"));
    s.ghg_ng = j.at("ghg_ng").get<std::int64_t>();
    s.nox_ng = j.at("nox_ng").get<std::int64_t>();
    s.network_hash = j.at("network_hash").get<std::uint64_t>();
    s.demand_hash = j.at("demand_hash").get<std::uint64_t>();
    return s;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw ValidationError("incomplete beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0.0) throw ValidationError("student_t_cdf: df must be > 0");
    if (t == 0.0) return 0.5;
    double x = df / (df + t * t);
    double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw ValidationError("welch_t: each sample needs n >= 2");
    auto mean_var = [](const std::vector<double>& s) {
        double m = 0.0;
        for (double v : s) m += v;
        m /= static_cast<double>(s.size());
        double var = 0.0;
        for (double v : s) var += (v - m) * (v - m);
        var /= static_cast<double>(s.size() - 1);
        return std::pair<double, double>{m, var};
    };
    auto [ma, va] = mean_var(a);
    auto [mb, vb] = mean_var(b);
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double se2 = va / na + vb / nb;
    WelchResult r;
    if (se2 == 0.0) {
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
            r.df = na + nb - 2.0;
            return r;
        }
        throw ValidationError("welch_t: degenerate samples (zero variance, unequal means)");
    }
    r.t = (ma - mb) / std::sqrt(se2);
    double da = (va / na) * (va / na) / (na - 1.0);
    double db = (vb / nb) * (vb / nb) / (nb - 1.0);
    r.df = se2 * se2 / (da + db);
    if (r.t == 0.0) {
        r.p = 1.0;
    } else {
        double x = r.df / (r.df + r.t * r.t);
        r.p = regularized_incomplete_beta(r.df / 2.0, 0.5, x);
    }
    return r;
}

std::vector<TimeSeriesPoint> time_series(const std::vector<IntervalLogRow>& log,
                                         SeriesMetric metric) {
    std::map<int, TimeSeriesPoint> by_interval;
    std::map<int, std::pair<double, double>> speed_accum; // dist, veh_s
    for (const auto& row : log) {
        auto& pt = by_interval[row.interval_index];
        pt.t_start_s = row.t_start_s;
        pt.t_end_s = row.t_end_s;
        switch (metric) {
            case SeriesMetric::GHG: pt.raw_ng += row.ghg_ng; break;
            case SeriesMetric::NOx: pt.raw_ng += row.nox_ng; break;
            case SeriesMetric::MeanSpeed: {
                auto& sp = speed_accum[row.interval_index];
                sp.first += row.distance_m;
                sp.second += row.vehicle_seconds;
                break;
            }
        }
    }
    std::vector<TimeSeriesPoint> out;
    out.reserve(by_interval.size());
    for (auto& [idx, pt] : by_interval) {
        if (metric == SeriesMetric::MeanSpeed) {
            const auto& sp = speed_accum[idx];
            pt.value = sp.second > 0.0 ? sp.first / sp.second * 3.6 : 0.0;
        } else {
            pt.value = static_cast<double>(pt.raw_ng) * 1e-9;
        }
        out.push_back(pt);
    }
    return out;
}

std::vector<double> heatmap_values(const std::vector<IntervalLogRow>& log,
                                   int interval_index, HeatmapField field) {
    std::map<LinkIndex, double> by_link;
    bool found = false;
    for (const auto& row : log) {
        if (row.interval_index != interval_index) continue;
        found = true;
        double v = 0.0;
        switch (field) {
            case HeatmapField::Speed: v = row.report.space_mean_speed_ms * 3.6; break;
            case HeatmapField::DensityRatio: v = row.report.density_ratio; break;
            case HeatmapField::GHG: v = row.report.ghg_rate_g_per_veh_s; break;
        }
        by_link[row.link] = v;
    }
    if (!found)
        throw ValidationError("heatmap: interval " + std::to_string(interval_index) +
                              " not in log");
    LinkIndex max_link = by_link.rbegin()->first;
    std::vector<double> out(static_cast<std::size_t>(max_link) + 1, 0.0);
    for (const auto& [l, v] : by_link) out[l] = v;
    return out;
}

RasterGrid rasterize_heatmap(const RoadNetwork& net, const std::vector<double>& link_values,
                             double cell_m) {
    if (!net.has_all_coords())
        throw ValidationError("rasterize: network has no node coordinates");
    if (cell_m <= 0.0) throw ValidationError("rasterize: cell size must be > 0");
    RasterGrid grid;
    double min_x = net.nodes()[0].x_m, max_x = min_x;
    double min_y = net.nodes()[0].y_m, max_y = min_y;
    for (const auto& n : net.nodes()) {
        min_x = std::min(min_x, n.x_m);
        max_x = std::max(max_x, n.x_m);
        min_y = std::min(min_y, n.y_m);
        max_y = std::max(max_y, n.y_m);
    }
    grid.cell_m = cell_m;
    grid.min_x = min_x;
    grid.min_y = min_y;
    grid.width = std::max(1, static_cast<int>((max_x - min_x) / cell_m) + 1);
    grid.height = std::max(1, static_cast<int>((max_y - min_y) / cell_m) + 1);
    grid.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);
    grid.counts.assign(grid.cells.size(), 0);

    for (std::size_t l = 0; l < net.links().size() && l < link_values.size(); ++l) {
        const Link& link = net.link(static_cast<LinkIndex>(l));
        const Intersection& a = net.node(link.from_node);
        const Intersection& b = net.node(link.to_node);
        int samples = std::max(2, static_cast<int>(link.length_m / cell_m) * 2);
        for (int s = 0; s <= samples; ++s) {
            double f = static_cast<double>(s) / samples;
            double x = a.x_m + f * (b.x_m - a.x_m);
            double y = a.y_m + f * (b.y_m - a.y_m);
            int cx = std::clamp(static_cast<int>((x - min_x) / cell_m), 0, grid.width - 1);
            int cy = std::clamp(static_cast<int>((y - min_y) / cell_m), 0, grid.height - 1);
            std::size_t idx = static_cast<std::size_t>(cy) * grid.width + cx;
            grid.cells[idx] += link_values[l];
            grid.counts[idx] += 1;
        }
    }
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        if (grid.counts[i] > 0) grid.cells[i] /= grid.counts[i];
    return grid;
}

ComparisonReport compare_scenarios(const std::vector<ScenarioTrips>& groups,
                                   const std::string& baseline_id) {
    if (groups.empty())
        throw ValidationError("compare: no scenarios given");
    const ScenarioTrips* baseline = nullptr;
    for (const auto& g : groups) {
        if (g.scenario_id == baseline_id) baseline = &g;
        if (g.network_hash != groups[0].network_hash || g.demand_hash != groups[0].demand_hash)
            throw ValidationError("compare: scenario " + g.scenario_id +
                                  " was run on different network/demand inputs");
    }
    if (!baseline)
        throw ValidationError("compare: baseline scenario not found: " + baseline_id);

    static const char* metrics[] = {"tt", "vkt", "speed", "ghg", "nox"};
    ComparisonReport report;
    if (groups.size() == 1) {
        // A run against itself: zero deltas by construction.
        for (const char* m : metrics) {
            ComparisonRow row;
            row.scenario_a = baseline_id;
            row.scenario_b = baseline_id;
            row.metric = m;
            row.welch = welch_t(metric_values(baseline->trips, m),
                                metric_values(baseline->trips, m));
            report.tests.push_back(row);
        }
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            for (const char* m : metrics) {
                ComparisonRow row;
                row.scenario_a = groups[i].scenario_id;
                row.scenario_b = groups[j].scenario_id;
                row.metric = m;
                row.welch = welch_t(metric_values(groups[i].trips, m),
                                    metric_values(groups[j].trips, m));
                report.tests.push_back(row);
            }
        }
    }
    std::vector<double> base_means;
    for (const char* m : metrics) {
        std::vector<double> vals = metric_values(baseline->trips, m);
        if (vals.empty()) throw ValidationError("compare: baseline has no metered trips");
        double mean = 0.0;
        for (double v : vals) mean += v;
        base_means.push_back(mean / static_cast<double>(vals.size()));
    }
    for (const auto& g : groups) {
        for (std::size_t mi = 0; mi < 5; ++mi) {
            std::vector<double> vals = metric_values(g.trips, metrics[mi]);
            if (vals.empty()) throw ValidationError("compare: empty trip set");
            PercentRow row;
            row.scenario = g.scenario_id;
            row.metric = metrics[mi];
            row.baseline_mean = base_means[mi];
            for (double v : vals) row.mean += v;
            row.mean /= static_cast<double>(vals.size());
            row.percent_change = (row.mean - row.baseline_mean) / row.baseline_mean * 100.0;
            report.percent.push_back(row);
        }
    }
    return report;
}

std::string comparison_to_csv(const ComparisonReport& report) {
    std::string out = "scenario_a,scenario_b,metric,t_stat,p_value,df\n";
    for (const auto& r : report.tests) {
        out += join_row({r.scenario_a, r.scenario_b, r.metric, format_double(r.welch.t),
                         format_double(r.welch.p), format_double(r.welch.df)});
    }
    out += "\nscenario,metric,baseline_mean,mean,percent_change\n";
    for (const auto& r : report.percent) {
        out += join_row({r.scenario, r.metric, format_double(r.baseline_mean),
                         format_double(r.mean), format_double(r.percent_change)});
    }
    return out;
}

} // namespace ecoroute
