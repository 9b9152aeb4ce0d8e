/**
 * @file allocate.hpp
 * @brief Feedback-bit strategies: enumeration, majorization, closed-form optima and table search
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbshare/quantize.hpp"
#include "fbshare/rate.hpp"
#include "fbshare/rate_table.hpp"
#include "fbshare/strategy.hpp"

namespace fbshare {

namespace detail {

inline void partitions(int remaining, int max_part, std::size_t slots, std::vector<int>& prefix,
                       std::vector<Strategy>& out) {
    if (slots == 0) {
        if (remaining == 0) out.emplace_back(prefix);
        return;
    }
    // the remaining slots can hold at most slots * max_part
    if (static_cast<long long>(slots) * max_part < remaining) return;
    for (int v = std::min(remaining, max_part); v >= 0; --v) {
        prefix.push_back(v);
        partitions(remaining - v, v, slots - 1, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace detail

/// All sorted non-increasing K-vectors of non-negative integers summing to
/// `total`, in lexicographically decreasing order.
inline std::vector<Strategy> enumerate_strategies(std::size_t k, int total) {
    if (k == 0) throw std::invalid_argument("need at least one user");
    if (total < 0) throw std::invalid_argument("total bits must be non-negative");
    std::vector<Strategy> out;
    std::vector<int> prefix;
    prefix.reserve(k);
    detail::partitions(total, total, k, prefix, out);
    return out;
}

enum class Majorization { a_majorizes, b_majorizes, equal, incomparable };

inline const char* to_string(Majorization m) {
    switch (m) {
        case Majorization::a_majorizes: return "a_majorizes";
        case Majorization::b_majorizes: return "b_majorizes";
        case Majorization::equal: return "equal";
        default: return "incomparable";
    }
}

/// Prefix-sum comparison of the sorted vectors.
inline Majorization majorizes(const Strategy& a, const Strategy& b) {
    if (a.size() != b.size()) throw std::invalid_argument("strategies must have the same length");
    if (a.total() != b.total()) throw std::invalid_argument("majorization needs equal sums");
    const Strategy sa = a.sorted_desc();
    const Strategy sb = b.sorted_desc();
    bool a_ge = true;
    bool b_ge = true;
    long long pa = 0;
    long long pb = 0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        pa += sa[i];
        pb += sb[i];
        if (pa < pb) a_ge = false;
        if (pb < pa) b_ge = false;
    }
    if (a_ge && b_ge) return Majorization::equal;
    if (a_ge) return Majorization::a_majorizes;
    if (b_ge) return Majorization::b_majorizes;
    return Majorization::incomparable;
}

/// Equal split [b, ..., b].
inline Strategy optimal_low_snr(std::size_t k, int b_bar) {
    if (k == 0 || b_bar < 0) throw std::invalid_argument("need k >= 1 and b_bar >= 0");
    return Strategy(std::vector<int>(k, b_bar));
}

/// Everything to one user [K b, 0, ..., 0].
inline Strategy optimal_high_snr(std::size_t k, int b_bar) {
    if (k == 0 || b_bar < 0) throw std::invalid_argument("need k >= 1 and b_bar >= 0");
    std::vector<int> v(k, 0);
    v[0] = static_cast<int>(k) * b_bar;
    return Strategy(std::move(v));
}

/**
 * Path-loss baseline b_k = b + (K-1)(log2 g_k - mean_i log2 g_i), rounded to
 * the nearest integers and repaired to the exact sum by largest remainder.
 * Components are clamped at zero.
 */
inline Strategy xu_baseline(int b_bar, std::span<const double> path_loss) {
    const std::size_t k = path_loss.size();
    if (k == 0) throw std::invalid_argument("need at least one user");
    if (b_bar < 0) throw std::invalid_argument("b_bar must be non-negative");
    double mean_log = 0.0;
    for (double g : path_loss) {
        if (!(g > 0.0)) throw std::invalid_argument("path losses must be positive");
        mean_log += std::log2(g);
    }
    mean_log /= static_cast<double>(k);

    std::vector<double> target(k);
    for (std::size_t i = 0; i < k; ++i)
        target[i] = std::max(0.0, b_bar + static_cast<double>(k - 1) * (std::log2(path_loss[i]) - mean_log));
    std::vector<int> bits(k);
    for (std::size_t i = 0; i < k; ++i) bits[i] = static_cast<int>(std::lround(target[i]));

    const int total = static_cast<int>(k) * b_bar;
    int excess = std::accumulate(bits.begin(), bits.end(), 0) - total;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (excess > 0) {
        // take back from the components rounded up the most
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return bits[a] - target[a] > bits[b] - target[b];
        });
        for (std::size_t j = 0; excess > 0; j = (j + 1) % k)
            if (bits[order[j]] > 0) {
                --bits[order[j]];
                --excess;
            }
    } else if (excess < 0) {
        // give to the components rounded down the most
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return target[a] - bits[a] > target[b] - bits[b];
        });
        for (std::size_t j = 0; excess < 0; j = (j + 1) % k) {
            ++bits[order[j]];
            ++excess;
        }
    }
    return Strategy(std::move(bits));
}

/// Users sorted by path loss, strongest first (stable for ties).
inline std::vector<std::size_t> users_by_path_loss(std::span<const double> path_loss) {
    std::vector<std::size_t> order(path_loss.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return path_loss[a] > path_loss[b]; });
    return order;
}

/// Places a sorted strategy on users: the i-th largest component goes to the
/// user with the i-th largest path loss.
inline Strategy assign_to_users(const Strategy& sorted, std::span<const double> path_loss) {
    if (sorted.size() != path_loss.size()) throw std::invalid_argument("strategy and path-loss lengths differ");
    const auto order = users_by_path_loss(path_loss);
    std::vector<int> bits(sorted.size());
    for (std::size_t i = 0; i < order.size(); ++i) bits[order[i]] = sorted[i];
    return Strategy(std::move(bits));
}

struct AllocationResult {
    Strategy strategy;  ///< bits per user index
    Strategy sorted;    ///< the winning element of the strategy set
    double sum_rate = 0.0;
    std::vector<double> per_user;
    double snr_db = 0.0;
    std::size_t streams = 0;
};

/// Table estimate of sum_k R(g_k P, b_k) for a user-indexed bit vector.
inline std::vector<double> table_user_rates(const RateTable& table, const Strategy& bits,
                                            std::span<const double> path_loss, double snr_db) {
    std::vector<double> out(bits.size());
    for (std::size_t u = 0; u < bits.size(); ++u) {
        const double g = path_loss.empty() ? 1.0 : path_loss[u];
        out[u] = table.interpolate(snr_db + linear_to_db(g), bits[u]);
    }
    return out;
}

/**
 * Exhaustive search over enumerate_strategies(K, total) of the table sum rate.
 * Only strict improvements replace the incumbent, so ties keep the earlier
 * strategy. Empty path_loss means all users have unit gain.
 */
inline AllocationResult optimize(const RateTable& table, int total, std::span<const double> path_loss,
                                 double snr_db) {
    const std::size_t k = table.meta.streams;
    std::vector<double> gamma(path_loss.begin(), path_loss.end());
    if (gamma.empty()) gamma.assign(k, 1.0);
    if (gamma.size() != k) throw std::invalid_argument("path_loss length must equal the served user count");
    for (double g : gamma)
        if (!(g > 0.0)) throw std::invalid_argument("path losses must be positive");
    if (total > table.max_bits()) throw std::out_of_range("table does not cover the bit budget");
    for (double g : gamma)
        if (!table.covers(snr_db + linear_to_db(g)))
            throw std::out_of_range("table does not cover the effective SNR of every user");

    AllocationResult best;
    best.snr_db = snr_db;
    best.streams = k;
    best.sum_rate = -std::numeric_limits<double>::infinity();
    for (const Strategy& s : enumerate_strategies(k, total)) {
        const Strategy assigned = assign_to_users(s, gamma);
        const std::vector<double> rates = table_user_rates(table, assigned, gamma, snr_db);
        const double sum = std::accumulate(rates.begin(), rates.end(), 0.0);
        if (sum > best.sum_rate) {
            best.strategy = assigned;
            best.sorted = s;
            best.sum_rate = sum;
            best.per_user = rates;
        }
    }
    return best;
}

/**
 * Runs optimize for each stream count with a table; table S serves the S
 * strongest users. Ties keep the smaller stream count.
 */
inline AllocationResult optimize_with_streams(std::span<const RateTable> tables, int total,
                                              std::span<const double> path_loss, double snr_db) {
    if (tables.empty()) throw std::invalid_argument("need at least one rate table");
    const std::size_t k = path_loss.empty() ? 0 : path_loss.size();
    std::vector<std::size_t> order = users_by_path_loss(path_loss);
    AllocationResult best;
    best.sum_rate = -std::numeric_limits<double>::infinity();
    for (const RateTable& t : tables) {
        const std::size_t s = t.meta.streams;
        if (k != 0 && s > k) throw std::invalid_argument("table serves more users than exist");
        std::vector<double> served;
        for (std::size_t i = 0; i < s && i < order.size(); ++i) served.push_back(path_loss[order[i]]);
        AllocationResult r = optimize(t, total, served, snr_db);
        if (r.sum_rate > best.sum_rate) {
            if (k != 0) {
                std::vector<int> full(k, 0);
                std::vector<double> rates(k, 0.0);
                for (std::size_t i = 0; i < s; ++i) {
                    full[order[i]] = r.strategy[i];
                    rates[order[i]] = r.per_user[i];
                }
                r.strategy = Strategy(std::move(full));
                r.per_user = std::move(rates);
            }
            best = std::move(r);
        }
    }
    return best;
}

struct ProxyReport {
    Strategy argmin_mean_error;
    Strategy argmax_mean_error;
    Strategy argmin_mean_log2_error;
    Strategy argmax_mean_log2_error;
    bool passed = false;
};

inline double sum_mean_error(const Strategy& s, std::size_t m) {
    double acc = 0.0;
    for (int b : s.bits) acc += mean_error(b, m);
    return acc;
}

inline double sum_mean_log2_error(const Strategy& s, std::size_t m) {
    double acc = 0.0;
    for (int b : s.bits) acc += mean_log2_error(b, m);
    return acc;
}

/**
 * Scans the closed-form proxies over the strategy set. Passes when the sum of
 * E[Z] is minimized by the equal split and maximized by the single-user split,
 * and the sum of E[log2 Z] the other way round. Needs total divisible by K.
 */
inline ProxyReport verify_objective_proxies(std::size_t k, int total, std::size_t m) {
    if (total % static_cast<int>(k) != 0) throw std::invalid_argument("total must be a multiple of K");
    const auto set = enumerate_strategies(k, total);
    ProxyReport r;
    double lo_z = HUGE_VAL, hi_z = -HUGE_VAL, lo_l = HUGE_VAL, hi_l = -HUGE_VAL;
    for (const Strategy& s : set) {
        const double z = sum_mean_error(s, m);
        const double l = sum_mean_log2_error(s, m);
        if (z < lo_z) lo_z = z, r.argmin_mean_error = s;
        if (z > hi_z) hi_z = z, r.argmax_mean_error = s;
        if (l < lo_l) lo_l = l, r.argmin_mean_log2_error = s;
        if (l > hi_l) hi_l = l, r.argmax_mean_log2_error = s;
    }
    const int b_bar = total / static_cast<int>(k);
    const Strategy equal = optimal_low_snr(k, b_bar);
    const Strategy single = optimal_high_snr(k, b_bar);
    r.passed = r.argmin_mean_error == equal && r.argmax_mean_error == single && r.argmin_mean_log2_error == single &&
               r.argmax_mean_log2_error == equal;
    return r;
}

struct OrderingCheck {
    Strategy more_even;    ///< majorized by `more_skewed`
    Strategy more_skewed;
    double snr_db = 0.0;
    Estimate difference;   ///< R(more_even) - R(more_skewed), paired
    bool low_snr = true;
    bool passed = false;
    bool resolved = false; ///< |difference| beyond 2 x CI in the expected direction
};

struct OrderingReport {
    std::vector<OrderingCheck> checks;
    std::vector<std::string> skipped;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const OrderingCheck& c) { return c.passed; });
    }
};

/**
 * For each comparable pair, checks the low-SNR direction (more even is not
 * worse, up to 2 x CI) when `low_snr`, else the high-SNR direction. Rates are
 * estimated jointly with paired differences on shared realizations.
 */
inline OrderingReport verify_theorem_ordering(std::span<const std::pair<Strategy, Strategy>> pairs, double snr_db,
                                              bool low_snr, const SystemModel& model, const MonteCarlo& mc) {
    OrderingReport report;
    std::vector<Strategy> strategies;
    auto index_of = [&](const Strategy& s) {
        const auto it = std::find(strategies.begin(), strategies.end(), s);
        if (it != strategies.end()) return static_cast<std::size_t>(it - strategies.begin());
        strategies.push_back(s);
        return strategies.size() - 1;
    };
    struct Job {
        std::size_t even;
        std::size_t skewed;
    };
    std::vector<Job> jobs;
    for (const auto& [a, b] : pairs) {
        const Majorization rel = majorizes(a, b);
        if (rel == Majorization::incomparable) {
            report.skipped.push_back(a.to_string() + " vs " + b.to_string() + ": incomparable");
            continue;
        }
        if (rel == Majorization::b_majorizes || rel == Majorization::equal)
            jobs.push_back({index_of(a), index_of(b)});
        else
            jobs.push_back({index_of(b), index_of(a)});
    }
    if (strategies.empty()) return report;
    const double powers[] = {db_to_linear(snr_db)};
    const SumRateStudy study = run_sum_rate_study(powers, strategies, {}, model, mc, true);
    for (const Job& j : jobs) {
        OrderingCheck c;
        c.more_even = strategies[j.even];
        c.more_skewed = strategies[j.skewed];
        c.snr_db = snr_db;
        c.low_snr = low_snr;
        c.difference = study.sum_difference(j.even, j.skewed, 0);
        const double signed_diff = low_snr ? c.difference.mean : -c.difference.mean;
        if (c.more_even == c.more_skewed) {
            c.passed = true;
        } else {
            c.passed = signed_diff >= -2.0 * c.difference.ci95;
            c.resolved = signed_diff > 2.0 * c.difference.ci95;
        }
        report.checks.push_back(c);
    }
    return report;
}

}  // namespace fbshare
