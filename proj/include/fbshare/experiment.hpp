/**
 * @file experiment.hpp
 * @brief Experiment configuration and the reproduction targets behind `fbshare reproduce`
 *
 * Each target writes one or more CSV files (snr_db, series_label, value, ci95)
 * and a manifest next to them recording the configuration, its hash, the
 * runtime and a short summary of the findings.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbshare/allocate.hpp"
#include "fbshare/io.hpp"
#include "fbshare/rate.hpp"
#include "fbshare/rate_table.hpp"

namespace fbshare {

/// Raised for invalid user configuration (exit code 2 in the CLI).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SnrRange {
    double start = 0.0;
    double step = 1.0;
    double stop = 35.0;

    std::vector<double> grid() const { return snr_grid(start, step, stop); }
};

/// Parses "start:step:stop" (or a single value).
inline SnrRange parse_snr_range(const std::string& text) {
    std::vector<double> parts;
    std::size_t begin = 0;
    while (true) {
        const std::size_t colon = text.find(':', begin);
        const std::string piece = text.substr(begin, colon == std::string::npos ? std::string::npos : colon - begin);
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
            throw ConfigError("bad SNR range '" + text + "' (expected start:step:stop in dB)");
        }
        if (colon == std::string::npos) break;
        begin = colon + 1;
    }
    if (parts.size() == 1) return {parts[0], 1.0, parts[0]};
    if (parts.size() != 3) throw ConfigError("bad SNR range '" + text + "' (expected start:step:stop in dB)");
    if (!(parts[1] > 0.0) || parts[2] < parts[0]) throw ConfigError("SNR range needs step > 0 and stop >= start");
    return {parts[0], parts[1], parts[2]};
}

inline constexpr std::size_t kFullSamples = 1000000;

struct ExperimentConfig {
    std::size_t m = 4;
    std::size_t k = 4;
    Codebook codebook = Codebook::rvq;
    Precoding precoding = Precoding::zf;
    StreamBeam stream_beam = StreamBeam::random_nullspace;
    std::optional<SnrRange> snr;  ///< unset: each command picks its own default
    int total_bits = 24;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::vector<double> path_loss;  ///< empty: all ones
    std::size_t streams = 0;        ///< 0: serve all K users
    std::string out = "results";
    std::size_t workers = 1;
    bool full = false;

    std::size_t samples_per_cell() const { return full ? std::max(samples, kFullSamples) : samples; }
    std::size_t served() const { return streams == 0 ? k : streams; }
    std::vector<double> snr_db(const SnrRange& fallback) const { return snr.value_or(fallback).grid(); }

    std::vector<double> gains() const {
        return path_loss.empty() ? std::vector<double>(k, 1.0) : path_loss;
    }

    void validate() const {
        if (m < 2 || m > kMaxDim) throw ConfigError("--m must be in 2.." + std::to_string(kMaxDim));
        if (k < 1 || k > m) throw ConfigError("--k must be in 1..M");
        if (streams > k) throw ConfigError("--streams cannot exceed K");
        if (total_bits < 0) throw ConfigError("--total-bits must be non-negative");
        if (samples < 1) throw ConfigError("--samples must be at least 1");
        if (!path_loss.empty() && path_loss.size() != k) throw ConfigError("--path-loss needs exactly K values");
        for (double g : path_loss)
            if (!(g > 0.0)) throw ConfigError("path losses must be positive");
        if (workers < 1) throw ConfigError("--workers must be at least 1");
    }

    TableMeta table_meta(std::size_t served_users) const {
        TableMeta meta;
        meta.m = m;
        meta.streams = served_users;
        meta.codebook = codebook;
        meta.precoding = precoding;
        meta.stream_beam = stream_beam;
        meta.samples = samples_per_cell();
        meta.seed = seed;
        return meta;
    }

    MonteCarlo monte_carlo(std::uint64_t stream = 0) const {
        MonteCarlo mc;
        mc.samples = samples_per_cell();
        mc.seed = seed;
        mc.stream = stream;
        mc.workers = workers;
        return mc;
    }
};

inline json to_json(const ExperimentConfig& c) {
    json j = {{"m", c.m},
              {"k", c.k},
              {"codebook", to_string(c.codebook)},
              {"precoder", to_string(c.precoding)},
              {"stream_beam", to_string(c.stream_beam)},
              {"total_bits", c.total_bits},
              {"samples", c.samples},
              {"seed", c.seed},
              {"path_loss", c.path_loss},
              {"streams", c.streams},
              {"out", c.out},
              {"full", c.full}};
    if (c.snr) j["snr"] = {c.snr->start, c.snr->step, c.snr->stop};
    return j;
}

/// Applies the keys present in `j` on top of `c`. A manifest's "config" block is accepted too.
inline void apply_json(ExperimentConfig& c, const json& input) {
    const json& j = input.contains("config") ? input.at("config") : input;
    try {
        if (j.contains("m")) c.m = j.at("m").get<std::size_t>();
        if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
        if (j.contains("codebook")) c.codebook = parse_codebook(j.at("codebook").get<std::string>());
        if (j.contains("precoder")) c.precoding = parse_precoding(j.at("precoder").get<std::string>());
        if (j.contains("stream_beam")) c.stream_beam = parse_stream_beam(j.at("stream_beam").get<std::string>());
        if (j.contains("total_bits")) c.total_bits = j.at("total_bits").get<int>();
        if (j.contains("samples")) c.samples = j.at("samples").get<std::size_t>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("path_loss")) c.path_loss = j.at("path_loss").get<std::vector<double>>();
        if (j.contains("streams")) c.streams = j.at("streams").get<std::size_t>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (j.contains("full")) c.full = j.at("full").get<bool>();
        if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
        if (j.contains("snr")) {
            const json& s = j.at("snr");
            if (s.is_string()) {
                c.snr = parse_snr_range(s.get<std::string>());
            } else {
                const auto v = s.get<std::vector<double>>();
                if (v.size() != 3) throw ConfigError("config snr must be [start, step, stop]");
                c.snr = SnrRange{v[0], v[1], v[2]};
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
}

/// Hash of everything that affects results (output directory and workers excluded).
inline std::string config_hash(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("out");
    return hex64(fnv1a(j.dump()));
}

struct TargetOutput {
    std::vector<std::filesystem::path> files;
    json summary = json::object();
    bool passed = true;  ///< whether the target's qualitative claims held
};

inline const std::vector<std::string>& reproduce_targets() {
    static const std::vector<std::string> names = {"table1", "table2", "table3", "fig2", "fig3",
                                                   "fig4",   "fig5",   "fig7",   "fig8"};
    return names;
}

namespace detail {

inline std::filesystem::path out_file(const ExperimentConfig& c, const std::string& name) {
    return std::filesystem::path(c.out) / name;
}

inline std::filesystem::path cache_dir(const ExperimentConfig& c) { return std::filesystem::path(c.out) / "cache"; }

inline RateTable target_table(const ExperimentConfig& c, std::size_t m, std::size_t served, Codebook codebook,
                              const std::vector<double>& grid, int max_bits) {
    TableConfig tc;
    tc.meta = c.table_meta(served);
    tc.meta.m = m;
    tc.meta.codebook = codebook;
    tc.meta.precoding = Precoding::zf;
    tc.snr_db = grid;
    tc.max_bits = max_bits;
    tc.workers = c.workers;
    return load_or_build(tc, cache_dir(c));
}

// Table-based sum-rate CI: cells share realizations, so half-widths are added.
inline double table_sum_ci(const RateTable& t, const Strategy& s, std::span<const double> gains, double db) {
    double ci = 0.0;
    for (std::size_t u = 0; u < s.size(); ++u) ci += t.interval(db + linear_to_db(gains.empty() ? 1.0 : gains[u]), s[u]);
    return ci;
}

inline json regimes_json(const std::vector<std::pair<double, std::string>>& winners) {
    json out = json::array();
    std::string prev;
    for (const auto& [db, label] : winners) {
        if (label == prev) {
            out.back()["to_db"] = db;
            continue;
        }
        out.push_back({{"from_db", db}, {"to_db", db}, {"strategy", label}});
        prev = label;
    }
    return out;
}

inline std::vector<CsvRow> study_rows(const SumRateStudy& st, const std::string& prefix) {
    std::vector<CsvRow> rows;
    for (std::size_t s = 0; s < st.strategies.size(); ++s)
        for (std::size_t p = 0; p < st.powers.size(); ++p)
            rows.push_back({linear_to_db(st.powers[p]), prefix + st.strategies[s].label(), st.sum_rate[s][p].mean,
                            st.sum_rate[s][p].ci95});
    return rows;
}

inline std::vector<double> to_powers(const std::vector<double>& grid) {
    std::vector<double> p;
    for (double db : grid) p.push_back(db_to_linear(db));
    return p;
}

// Whether consecutive strategies are strictly ordered (decreasing when
// `descending`) beyond 2 x CI at power index p.
inline bool chain_resolved(const SumRateStudy& st, std::size_t p, bool descending) {
    for (std::size_t s = 0; s + 1 < st.strategies.size(); ++s) {
        const Estimate d = st.sum_difference(s, s + 1, p);
        const double signed_mean = descending ? d.mean : -d.mean;
        if (!(signed_mean > 2.0 * d.ci95)) return false;
    }
    return true;
}

}  // namespace detail

/// Optimal strategies per stream count for symmetric users, then the overall winner.
inline TargetOutput reproduce_table1(const ExperimentConfig& c) {
    const auto grid = c.snr_db({0.0, 1.0, 35.0});
    TargetOutput out;
    std::vector<RateTable> tables;
    std::vector<CsvRow> rows;
    for (std::size_t s = c.k; s >= 1; --s) {
        tables.push_back(detail::target_table(c, c.m, s, c.codebook, grid, c.total_bits));
        std::vector<std::pair<double, std::string>> winners;
        for (double db : grid) {
            const AllocationResult r = optimize(tables.back(), c.total_bits, {}, db);
            winners.emplace_back(db, r.sorted.to_string());
            rows.push_back({db, "streams" + std::to_string(s) + ":" + r.sorted.label(), r.sum_rate,
                            detail::table_sum_ci(tables.back(), r.sorted, {}, db)});
        }
        out.summary["streams_" + std::to_string(s)] = detail::regimes_json(winners);
    }
    std::vector<std::pair<double, std::string>> overall;
    for (double db : grid) {
        const AllocationResult r = optimize_with_streams(tables, c.total_bits, {}, db);
        overall.emplace_back(db, std::to_string(r.streams) + " streams " + r.sorted.to_string());
        rows.push_back({db, "best:" + r.sorted.label(), r.sum_rate, detail::table_sum_ci(tables[c.k - r.streams], r.sorted, {}, db)});
    }
    out.summary["overall"] = detail::regimes_json(overall);
    write_csv(detail::out_file(c, "table1.csv"), rows);
    out.files.push_back(detail::out_file(c, "table1.csv"));
    return out;
}

/// Optimal strategies under unequal path losses and the comparison with the baseline.
inline TargetOutput reproduce_table2(ExperimentConfig c) {
    if (c.path_loss.empty()) c.path_loss = {1.5, 1.25, 1.0, 0.75};
    if (c.path_loss.size() != c.k) throw ConfigError("table2 needs K path losses");
    if (c.total_bits % static_cast<int>(c.k) != 0) throw ConfigError("table2 needs total bits divisible by K");
    const auto grid = c.snr_db({0.0, 1.0, 35.0});
    const auto [lo, hi] = std::minmax_element(c.path_loss.begin(), c.path_loss.end());
    const double step = c.snr.value_or(SnrRange{}).step;
    const double below = std::ceil(-linear_to_db(*lo) / step) * step;
    const double above = std::ceil(linear_to_db(*hi) / step) * step;
    const auto table_grid = snr_grid(grid.front() - std::max(0.0, below), step, grid.back() + std::max(0.0, above));
    const RateTable table = detail::target_table(c, c.m, c.k, c.codebook, table_grid, c.total_bits);

    TargetOutput out;
    const Strategy baseline = xu_baseline(c.total_bits / static_cast<int>(c.k), c.path_loss);
    std::vector<Strategy> strategies = {baseline};
    std::vector<std::size_t> winner_index;
    std::vector<std::pair<double, std::string>> winners;
    for (double db : grid) {
        const AllocationResult r = optimize(table, c.total_bits, c.path_loss, db);
        winners.emplace_back(db, r.strategy.to_string());
        auto it = std::find(strategies.begin(), strategies.end(), r.strategy);
        if (it == strategies.end()) it = strategies.insert(strategies.end(), r.strategy);
        winner_index.push_back(static_cast<std::size_t>(it - strategies.begin()));
    }
    const auto powers = detail::to_powers(grid);
    const SumRateStudy st = run_sum_rate_study(powers, strategies, c.path_loss, {c.m, c.k, c.codebook, c.precoding},
                                               c.monte_carlo(1), true);
    std::vector<CsvRow> rows;
    json beats = json::array();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const std::size_t w = winner_index[p];
        rows.push_back({grid[p], "optimal", st.sum_rate[w][p].mean, st.sum_rate[w][p].ci95});
        rows.push_back({grid[p], "baseline:" + baseline.label(), st.sum_rate[0][p].mean, st.sum_rate[0][p].ci95});
        if (w != 0) {
            const Estimate d = st.sum_difference(w, 0, p);
            rows.push_back({grid[p], "optimal_minus_baseline", d.mean, d.ci95});
            beats.push_back({{"snr_db", grid[p]}, {"gain", d.mean}, {"ci95", d.ci95}, {"resolved", d.mean > 2 * d.ci95}});
        }
    }
    out.summary["baseline"] = baseline.to_string();
    out.summary["regimes"] = detail::regimes_json(winners);
    out.summary["gain_over_baseline"] = beats;
    write_csv(detail::out_file(c, "table2.csv"), rows);
    out.files.push_back(detail::out_file(c, "table2.csv"));
    return out;
}

/// Strategy-set sizes for totals 8, 16, ..., 64 (the snr_db column holds the total).
inline TargetOutput reproduce_table3(const ExperimentConfig& c) {
    TargetOutput out;
    std::vector<CsvRow> rows;
    json counts = json::object();
    for (int t = 8; t <= 64; t += 8) {
        const auto n = enumerate_strategies(c.k, t).size();
        rows.push_back({static_cast<double>(t), "strategies_k" + std::to_string(c.k), static_cast<double>(n), 0.0});
        counts[std::to_string(t)] = n;
    }
    out.summary["counts"] = counts;
    write_csv(detail::out_file(c, "table3.csv"), rows);
    out.files.push_back(detail::out_file(c, "table3.csv"));
    return out;
}

/// User-1 rate and sum rate in a 3 x 3 system as the co-users' feedback changes.
inline TargetOutput reproduce_fig2(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-5.0, 5.0, 35.0});
    const std::vector<Strategy> strategies = {{10, 10, 10}, {10, 5, 5}, {10, 0, 0}};
    const SumRateStudy st =
        run_sum_rate_study(detail::to_powers(grid), strategies, {}, {3, 3, c.codebook, c.precoding}, c.monte_carlo(), true);
    std::vector<CsvRow> rows = detail::study_rows(st, "sum:");
    bool separable = true;
    for (std::size_t s = 0; s < strategies.size(); ++s)
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const Estimate& e = st.user_rate[s][p][0];
            rows.push_back({grid[p], "user1:" + strategies[s].label(), e.mean, e.ci95});
            if (s > 0) {
                const Estimate d = st.user_difference(0, s, p, 0);
                separable = separable && std::abs(d.mean) <= 2.0 * d.ci95;
            }
        }
    TargetOutput out;
    out.summary["user1_rate_unaffected"] = separable;
    out.passed = separable;
    write_csv(detail::out_file(c, "fig2.csv"), rows);
    out.files.push_back(detail::out_file(c, "fig2.csv"));
    return out;
}

/// Single-user rate R(P, b) for b = 0..total in a 4 x 4 system.
inline TargetOutput reproduce_fig3(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-5.0, 1.0, 35.0});
    const RateTable t = detail::target_table(c, c.m, c.k, c.codebook, grid, c.total_bits);
    std::vector<CsvRow> rows;
    bool monotone = true;
    for (std::size_t s = 0; s < grid.size(); ++s)
        for (std::size_t b = 0; b < t.bits.size(); ++b) {
            rows.push_back({grid[s], "b" + std::to_string(t.bits[b]), t.rate[s][b], t.ci95[s][b]});
            if (b > 0 && t.rate[s][b] < t.rate[s][b - 1] - 2.0 * (t.ci95[s][b] + t.ci95[s][b - 1])) monotone = false;
        }
    TargetOutput out;
    out.summary["monotone_in_bits"] = monotone;
    out.passed = monotone;
    write_csv(detail::out_file(c, "fig3.csv"), rows);
    out.files.push_back(detail::out_file(c, "fig3.csv"));
    return out;
}

/// Sum rates of the five 2 x 2 strategies with 16 bits.
inline TargetOutput reproduce_fig4(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-20.0, 5.0, 70.0});
    const std::vector<Strategy> strategies = {{0, 16}, {2, 14}, {4, 12}, {6, 10}, {8, 8}};
    const SumRateStudy st =
        run_sum_rate_study(detail::to_powers(grid), strategies, {}, {2, 2, c.codebook, c.precoding}, c.monte_carlo(), true);
    json order = json::array();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        std::string regime = "mixed";
        if (detail::chain_resolved(st, p, false)) regime = "equal_best";
        if (detail::chain_resolved(st, p, true)) regime = "single_best";
        order.push_back({{"snr_db", grid[p]}, {"ordering", regime}});
    }
    TargetOutput out;
    out.summary["ordering"] = order;
    write_csv(detail::out_file(c, "fig4.csv"), detail::study_rows(st, ""));
    out.files.push_back(detail::out_file(c, "fig4.csv"));
    return out;
}

/// RVQ and spherical-cap panels for four 4 x 4 strategies with 36 bits.
inline TargetOutput reproduce_fig5(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-10.0, 5.0, 45.0});
    const std::vector<Strategy> strategies = {{36, 0, 0, 0}, {18, 18, 0, 0}, {12, 12, 12, 0}, {9, 9, 9, 9}};
    const auto powers = detail::to_powers(grid);
    const MonteCarlo mc = c.monte_carlo();
    const SumRateStudy rvq = run_sum_rate_study(powers, strategies, {}, {4, 4, Codebook::rvq, c.precoding}, mc, true);
    const SumRateStudy cap =
        run_sum_rate_study(powers, strategies, {}, {4, 4, Codebook::spherical_cap, c.precoding}, mc, true);
    std::vector<CsvRow> rows = detail::study_rows(rvq, "rvq:");
    const auto cap_rows = detail::study_rows(cap, "cap:");
    rows.insert(rows.end(), cap_rows.begin(), cap_rows.end());
    bool dominance = true;
    for (std::size_t s = 0; s < strategies.size(); ++s)
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const Estimate& a = cap.sum_rate[s][p];
            const Estimate& b = rvq.sum_rate[s][p];
            if (a.mean < b.mean - 2.0 * std::max(a.ci95, b.ci95)) dominance = false;
        }
    TargetOutput out;
    out.summary["cap_not_below_rvq"] = dominance;
    out.summary["high_snr_order_rvq"] = detail::chain_resolved(rvq, grid.size() - 1, true);
    out.summary["high_snr_order_cap"] = detail::chain_resolved(cap, grid.size() - 1, true);
    out.passed = dominance;
    write_csv(detail::out_file(c, "fig5.csv"), rows);
    out.files.push_back(detail::out_file(c, "fig5.csv"));
    return out;
}

/// Practical-codebook region: RVQ and spherical cap bound the sum rate of the
/// optimized strategy and of equal sharing (36 bits, 4 x 4).
inline TargetOutput reproduce_fig7(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-10.0, 1.0, 45.0});
    constexpr int total = 36;
    const Strategy equal = optimal_low_snr(4, total / 4);
    std::vector<CsvRow> rows;
    TargetOutput out;
    for (Codebook cb : {Codebook::rvq, Codebook::spherical_cap}) {
        const RateTable t = detail::target_table(c, 4, 4, cb, grid, total);
        const std::string tag = to_string(cb);
        std::vector<std::pair<double, std::string>> winners;
        for (double db : grid) {
            const AllocationResult r = optimize(t, total, {}, db);
            winners.emplace_back(db, r.sorted.to_string());
            rows.push_back({db, "proposed_" + tag, r.sum_rate, detail::table_sum_ci(t, r.sorted, {}, db)});
            double eq = 0.0;
            for (int b : equal.bits) eq += t.interpolate(db, b);
            rows.push_back({db, "equal_" + tag, eq, detail::table_sum_ci(t, equal, {}, db)});
        }
        out.summary["regimes_" + tag] = detail::regimes_json(winners);
    }
    write_csv(detail::out_file(c, "fig7.csv"), rows);
    out.files.push_back(detail::out_file(c, "fig7.csv"));
    return out;
}

/// ZF and regularized ZF with the optimized and the equal strategy against TDMA (60 bits).
inline TargetOutput reproduce_fig8(const ExperimentConfig& c) {
    const auto grid = c.snr_db({-10.0, 5.0, 40.0});
    constexpr int total = 60;
    const RateTable t = detail::target_table(c, 4, 4, c.codebook, grid, total);
    std::vector<Strategy> strategies = {optimal_low_snr(4, total / 4)};
    std::vector<std::size_t> winner_index;
    for (double db : grid) {
        const Strategy s = optimize(t, total, {}, db).sorted;
        auto it = std::find(strategies.begin(), strategies.end(), s);
        if (it == strategies.end()) it = strategies.insert(strategies.end(), s);
        winner_index.push_back(static_cast<std::size_t>(it - strategies.begin()));
    }
    const auto powers = detail::to_powers(grid);
    const MonteCarlo mc = c.monte_carlo();
    const SumRateStudy zf = run_sum_rate_study(powers, strategies, {}, {4, 4, c.codebook, Precoding::zf}, mc, false);
    const SumRateStudy rzf = run_sum_rate_study(powers, strategies, {}, {4, 4, c.codebook, Precoding::rzf}, mc, false);
    std::vector<CsvRow> rows;
    json rzf_vs_zf = json::array();
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const std::size_t w = winner_index[p];
        rows.push_back({grid[p], "zf_proposed", zf.sum_rate[w][p].mean, zf.sum_rate[w][p].ci95});
        rows.push_back({grid[p], "zf_equal", zf.sum_rate[0][p].mean, zf.sum_rate[0][p].ci95});
        rows.push_back({grid[p], "rzf_proposed", rzf.sum_rate[w][p].mean, rzf.sum_rate[w][p].ci95});
        rows.push_back({grid[p], "rzf_equal", rzf.sum_rate[0][p].mean, rzf.sum_rate[0][p].ci95});
        const Estimate td = tdma_rate(powers[p], total, 4, mc, c.codebook);
        rows.push_back({grid[p], "tdma", td.mean, td.ci95});
        rzf_vs_zf.push_back({{"snr_db", grid[p]}, {"rzf_minus_zf_equal", rzf.sum_rate[0][p].mean - zf.sum_rate[0][p].mean}});
    }
    TargetOutput out;
    out.summary["rzf_vs_zf"] = rzf_vs_zf;
    write_csv(detail::out_file(c, "fig8.csv"), rows);
    out.files.push_back(detail::out_file(c, "fig8.csv"));
    return out;
}

/// Runs a target and writes `<target>_manifest.json` next to its CSVs.
inline TargetOutput reproduce(const std::string& target, const ExperimentConfig& c) {
    c.validate();
    const auto t0 = std::chrono::steady_clock::now();
    TargetOutput out;
    if (target == "table1") out = reproduce_table1(c);
    else if (target == "table2") out = reproduce_table2(c);
    else if (target == "table3") out = reproduce_table3(c);
    else if (target == "fig2") out = reproduce_fig2(c);
    else if (target == "fig3") out = reproduce_fig3(c);
    else if (target == "fig4") out = reproduce_fig4(c);
    else if (target == "fig5") out = reproduce_fig5(c);
    else if (target == "fig7") out = reproduce_fig7(c);
    else if (target == "fig8") out = reproduce_fig8(c);
    else throw ConfigError("unknown target '" + target + "'");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json files = json::array();
    for (const auto& f : out.files) files.push_back(f.filename().string());
    const json manifest = {{"target", target},
                           {"config", to_json(c)},
                           {"config_hash", config_hash(c)},
                           {"seed", c.seed},
                           {"samples", c.samples_per_cell()},
                           {"runtime_seconds", seconds},
                           {"files", files},
                           {"summary", out.summary}};
    const auto path = detail::out_file(c, target + "_manifest.json");
    write_json_file(path, manifest);
    out.files.push_back(path);
    return out;
}

}  // namespace fbshare
