/**
 * @file rate_table.hpp
 * @brief Per-user rate R(P, b) tabulated over an SNR grid and a bit range
 *
 * Every cell is estimated on the same realizations (substream i of one base
 * stream), so differences between cells carry correlated noise and cancel
 * much of it. A one-cell table equals estimate_user_rate bit-exactly.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbshare/parallel.hpp"
#include "fbshare/rate.hpp"

namespace fbshare {

/// Everything that determines a table's contents besides the grids.
struct TableMeta {
    std::size_t m = 4;
    std::size_t streams = 4;
    Codebook codebook = Codebook::rvq;
    Precoding precoding = Precoding::zf;
    StreamBeam stream_beam = StreamBeam::random_nullspace;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::optional<int> co_user_bits;

    friend bool operator==(const TableMeta&, const TableMeta&) = default;
};

struct TableConfig {
    TableMeta meta;
    std::vector<double> snr_db;
    int max_bits = 24;
    std::size_t workers = 1;

    SystemModel model() const { return {meta.m, meta.streams, meta.codebook, meta.precoding, meta.stream_beam}; }
    MonteCarlo monte_carlo() const {
        MonteCarlo mc;
        mc.samples = meta.samples;
        mc.seed = meta.seed;
        mc.stream = meta.stream;
        mc.workers = 1;
        return mc;
    }
};

class RateTable {
  public:
    TableMeta meta;
    std::vector<double> snr_db;
    std::vector<int> bits;
    std::vector<std::vector<double>> rate;  ///< [snr][bit]
    std::vector<std::vector<double>> ci95;  ///< [snr][bit]
    std::size_t degenerate = 0;

    int max_bits() const { return bits.empty() ? -1 : bits.back(); }

    bool covers(double db) const {
        return !snr_db.empty() && db >= snr_db.front() - 1e-9 && db <= snr_db.back() + 1e-9;
    }

    /// R(P, b) at an arbitrary SNR inside the grid, linear in dB between points.
    double interpolate(double db, int b) const {
        if (b < 0 || b > max_bits()) throw std::out_of_range("bit count " + std::to_string(b) + " outside the table");
        if (!covers(db)) throw std::out_of_range("SNR " + std::to_string(db) + " dB outside the table grid");
        const auto col = static_cast<std::size_t>(b - bits.front());
        if (snr_db.size() == 1) return rate[0][col];
        std::size_t hi = 1;
        while (hi + 1 < snr_db.size() && snr_db[hi] < db) ++hi;
        const std::size_t lo = hi - 1;
        const double t = std::clamp((db - snr_db[lo]) / (snr_db[hi] - snr_db[lo]), 0.0, 1.0);
        return rate[lo][col] + t * (rate[hi][col] - rate[lo][col]);
    }

    /// CI half-width at the nearer grid point.
    double interval(double db, int b) const {
        if (!covers(db)) throw std::out_of_range("SNR outside the table grid");
        std::size_t best = 0;
        for (std::size_t i = 1; i < snr_db.size(); ++i)
            if (std::abs(snr_db[i] - db) < std::abs(snr_db[best] - db)) best = i;
        return ci95[best][static_cast<std::size_t>(b - bits.front())];
    }
};

/// start:step:stop in dB, inclusive of stop up to rounding.
inline std::vector<double> snr_grid(double start, double step, double stop) {
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("SNR grid needs step > 0 and stop >= start");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
}

inline RateTable build_rate_table(const TableConfig& cfg) {
    if (cfg.snr_db.empty()) throw std::invalid_argument("SNR grid is empty");
    if (cfg.max_bits < 0) throw std::invalid_argument("bit range is empty");
    const SystemModel model = cfg.model();
    check_dimensions(model.m, model.k);
    const MonteCarlo mc = cfg.monte_carlo();

    std::vector<double> powers;
    for (double db : cfg.snr_db) powers.push_back(db_to_linear(db));

    const auto nb = static_cast<std::size_t>(cfg.max_bits + 1);
    std::vector<std::vector<Estimate>> by_bits(nb);
    parallel_for(nb, cfg.workers, [&](std::size_t b) {
        by_bits[b] = estimate_user_rate_curve(powers, static_cast<int>(b), model, mc, cfg.meta.co_user_bits);
    });

    RateTable t;
    t.meta = cfg.meta;
    t.snr_db = cfg.snr_db;
    for (std::size_t b = 0; b < nb; ++b) t.bits.push_back(static_cast<int>(b));
    t.rate.assign(powers.size(), std::vector<double>(nb));
    t.ci95.assign(powers.size(), std::vector<double>(nb));
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t s = 0; s < powers.size(); ++s) {
            t.rate[s][b] = by_bits[b][s].mean;
            t.ci95[s][b] = by_bits[b][s].ci95;
        }
        t.degenerate += by_bits[b].front().degenerate;
    }
    return t;
}

}  // namespace fbshare
