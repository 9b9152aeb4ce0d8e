/**
 * @file rate.hpp
 * @brief Monte Carlo estimation of per-user and sum rates over quantized-CSI ZF/RZF
 *
 * A realization draws every user's channel plus the randomness its quantizer
 * needs (one uniform for the error magnitude, one isotropic direction in the
 * channel's orthogonal complement). None of these draws depend on the feedback
 * bits, the transmit power, or the codebook model, so any number of
 * strategies, powers and codebooks can be evaluated on the same realization
 * (common random numbers). Realization i always comes from substream i of the
 * caller's base stream, and partial results are merged in a fixed chunk order,
 * so estimates do not depend on the worker count.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbshare/channel.hpp"
#include "fbshare/linalg.hpp"
#include "fbshare/parallel.hpp"
#include "fbshare/precode.hpp"
#include "fbshare/quantize.hpp"
#include "fbshare/rng.hpp"
#include "fbshare/strategy.hpp"

namespace fbshare {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Per-user SINR ingredients: gain Q, signal alignment X, interference alignment W, error Z.
struct SinrSample {
    double q = 0.0;
    double x = 0.0;
    double w = 0.0;
    double z = 0.0;
    /// Set when the precoder does not null the quantized directions (RZF);
    /// otherwise the interference alignment is exactly z * w.
    std::optional<double> measured_interference;

    double interference() const { return measured_interference.value_or(z * w); }
};

/// log2(1 + (p/S) q x / (1 + (p/S) q y)) with y the interference alignment.
inline double instant_rate(const SinrSample& s, double p, std::size_t streams) {
    const double rho = p / static_cast<double>(streams);
    return std::log1p(rho * s.q * s.x / (1.0 + rho * s.q * s.interference())) * std::numbers::log2e;
}

/// Increasing and decreasing terms: rate = plus - minus.
struct RateTerms {
    double plus = 0.0;
    double minus = 0.0;
};

inline RateTerms rate_terms(const SinrSample& s, double p, std::size_t streams) {
    const double rho = p / static_cast<double>(streams);
    const double leak = rho * s.q * s.interference();
    return {std::log1p(rho * s.q * s.x + leak) * std::numbers::log2e, std::log1p(leak) * std::numbers::log2e};
}

/// e^x E1(x) for x > 0, without overflow for large x.
inline double scaled_exp_integral_e1(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("scaled_exp_integral_e1 needs x > 0");
    if (x <= 1.0) {
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= -x / k;
            sum -= term / k;
            if (std::abs(term) < 1e-18) break;
        }
        return std::exp(x) * (-std::numbers::egamma - std::log(x) + sum);
    }
    // modified Lentz continued fraction for E1
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

/// E[log2(1 + rho T)] for T ~ Exp(1): the interference-free ZF rate, since
/// |h_k^H v_k|^2 ~ Exp(1) whenever v_k is independent of h_k.
inline double mean_log2_one_plus_exponential(double rho) {
    if (rho <= 0.0) return 0.0;
    return std::numbers::log2e * scaled_exp_integral_e1(1.0 / rho);
}

/// ZF beam choice when fewer users than antennas are served.
enum class StreamBeam { pseudo_inverse, random_nullspace };

inline const char* to_string(StreamBeam b) {
    return b == StreamBeam::pseudo_inverse ? "pinv" : "random";
}

inline StreamBeam parse_stream_beam(const std::string& s) {
    if (s == "pinv" || s == "pseudo_inverse") return StreamBeam::pseudo_inverse;
    if (s == "random" || s == "random_nullspace") return StreamBeam::random_nullspace;
    throw std::invalid_argument("unknown stream beam '" + s + "' (expected pinv or random)");
}

/// Served-user system: M antennas, K = S served single-antenna users.
struct SystemModel {
    std::size_t m = 4;
    std::size_t k = 4;
    Codebook codebook = Codebook::rvq;
    Precoding precoding = Precoding::zf;
    StreamBeam stream_beam = StreamBeam::random_nullspace;

    std::size_t streams() const { return k; }
    /// A single served user is beamformed along its own quantized direction.
    bool random_beams() const {
        return precoding == Precoding::zf && stream_beam == StreamBeam::random_nullspace && k > 1 && k < m;
    }
    /// True when v_k never depends on user k's own channel.
    bool beams_independent_of_own_channel() const {
        return precoding == Precoding::zf && (k == m || random_beams());
    }
    CodebookModel quantizer(int bits) const { return {codebook, bits, m}; }
};

inline constexpr double kZ95 = 1.959963984540054;

struct Estimate {
    double mean = 0.0;
    double ci95 = 0.0;  ///< half-width, normal approximation
    std::size_t samples = 0;
    std::size_t degenerate = 0;  ///< realizations redrawn because the precoder was singular
};

/// Welford accumulator with an order-preserving merge.
class RunningStat {
  public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningStat& other) {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double total = static_cast<double>(n_ + other.n_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * static_cast<double>(other.n_) / total;
        m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
        n_ += other.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

    Estimate estimate(std::size_t degenerate = 0) const {
        const double half = n_ > 1 ? kZ95 * std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
        return {mean_, half, n_, degenerate};
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Sample count, base stream and parallelism for one Monte Carlo run.
struct MonteCarlo {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::size_t workers = 1;
    /// Joint sum-rate studies also track each rate minus log2(1 + rho |h_k^H v_k|^2)
    /// plus its exact mean when v_k is independent of h_k (ZF, or random null-space
    /// beams), and report per power whichever estimator has the smaller variance.
    bool control_variate = true;

    RngStream base() const { return RngStream(seed, stream); }
};

/// Bit-independent randomness of one realization.
struct RealizationDraws {
    std::size_t m = 0;
    std::size_t k = 0;
    std::array<CVec, kMaxDim> h_tilde{};
    std::array<double, kMaxDim> q{};
    std::array<double, kMaxDim> u{};
    std::array<CVec, kMaxDim> orth{};
    std::array<CVec, kMaxDim> beam_draw{};  ///< only for random null-space beams with K < M
};

inline RealizationDraws draw_realization(const SystemModel& model, RngStream& rng) {
    const ChannelSet channels = sample_channel_set(model.m, model.k, {}, rng);
    RealizationDraws d;
    d.m = model.m;
    d.k = model.k;
    for (std::size_t i = 0; i < model.k; ++i) {
        d.q[i] = norm_sq(channels.channels[i]);
        d.h_tilde[i] = scaled(channels.channels[i], 1.0 / std::sqrt(d.q[i]));
    }
    for (std::size_t i = 0; i < model.k; ++i) {
        d.u[i] = rng.uniform();
        d.orth[i] = sample_unit_in_nullspace(d.h_tilde[i], rng);
    }
    if (model.random_beams())
        for (std::size_t i = 0; i < model.k; ++i) d.beam_draw[i] = sample_gaussian_vector(model.m, rng);
    return d;
}

struct QuantizedSet {
    std::size_t k = 0;
    std::array<QuantizationOutcome, kMaxDim> users{};
    std::array<CVec, kMaxDim> h_hats{};

    std::span<const CVec> directions() const { return {h_hats.data(), k}; }
};

inline QuantizedSet quantize_realization(const SystemModel& model, const RealizationDraws& d,
                                         std::span<const int> bits) {
    if (bits.size() != model.k) throw std::invalid_argument("bit vector length must equal the served user count");
    QuantizedSet out;
    out.k = model.k;
    for (std::size_t i = 0; i < model.k; ++i) {
        if (bits[i] < 0) throw std::invalid_argument("bits must be non-negative");
        const double z = error_for_draw(model.quantizer(bits[i]), d.u[i]);
        out.users[i] = assemble_direct(d.h_tilde[i], d.q[i], z, d.orth[i]);
        out.h_hats[i] = out.users[i].h_hat;
    }
    return out;
}

/// Throws DegenerateInput for a singular ZF draw.
inline Precoder build_precoder(const SystemModel& model, const RealizationDraws& d, const QuantizedSet& qs,
                               double p) {
    if (model.precoding == Precoding::zf) {
        if (model.random_beams())
            return zf_random_nullspace(qs.directions(), model.m, {d.beam_draw.data(), model.k});
        return zf_precoder(qs.directions(), model.m);
    }
    return rzf_precoder(qs.directions(), model.m, p);
}

struct UserSinrs {
    std::size_t k = 0;
    std::array<SinrSample, kMaxDim> users{};
};

inline UserSinrs extract_sinr(const SystemModel& model, const RealizationDraws& d, const QuantizedSet& qs,
                              const Precoder& pc) {
    UserSinrs out;
    out.k = model.k;
    std::array<CVec, kMaxDim> beams{};
    for (std::size_t i = 0; i < model.k; ++i) beams[i] = pc.beam(i);
    for (std::size_t u = 0; u < model.k; ++u) {
        SinrSample s;
        s.q = d.q[u];
        s.z = qs.users[u].z;
        s.x = std::norm(inner(d.h_tilde[u], beams[u]));
        double leak = 0.0;
        for (std::size_t i = 0; i < model.k; ++i) {
            if (i == u) continue;
            s.w += std::norm(inner(qs.users[u].e, beams[i]));
            leak += std::norm(inner(d.h_tilde[u], beams[i]));
        }
        if (model.precoding == Precoding::rzf) s.measured_interference = leak;
        out.users[u] = s;
    }
    return out;
}

/// One non-degenerate realization; singular draws are redrawn from the same stream.
inline UserSinrs simulate_realization(const SystemModel& model, std::span<const int> bits, double p, RngStream& rng,
                                      std::size_t* degenerate = nullptr) {
    for (;;) {
        const RealizationDraws d = draw_realization(model, rng);
        const QuantizedSet qs = quantize_realization(model, d, bits);
        try {
            return extract_sinr(model, d, qs, build_precoder(model, d, qs, p));
        } catch (const DegenerateInput&) {
            if (degenerate) ++*degenerate;
        }
    }
}

namespace detail {

inline constexpr std::size_t kChunk = 4096;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// Runs per_realization(i, acc) over [0, n) in fixed chunks on `workers` threads
// and merges chunk accumulators in chunk order.
template <class Acc, class MakeAcc, class PerRealization>
Acc run_chunked(std::size_t n, std::size_t workers, MakeAcc make_acc, PerRealization per_realization) {
    const std::size_t chunks = chunk_count(n);
    std::vector<Acc> partial;
    partial.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) partial.push_back(make_acc());
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) per_realization(i, partial[c]);
    });
    Acc total = make_acc();
    for (auto& p : partial) total.merge(p);
    return total;
}

struct StatVector {
    std::vector<RunningStat> stats;
    std::size_t degenerate = 0;

    void merge(const StatVector& other) {
        for (std::size_t i = 0; i < stats.size(); ++i) stats[i].merge(other.stats[i]);
        degenerate += other.degenerate;
    }
};

// Evaluates `visit(power_index, sinrs)` for every power on one realization,
// redrawing the realization if any precoder is degenerate.
template <class Visit>
void evaluate_powers(const SystemModel& model, std::span<const double> powers, std::span<const int> bits,
                     RngStream rng, std::size_t& degenerate, Visit visit) {
    std::vector<UserSinrs> per_power(powers.size());
    for (;;) {
        const RealizationDraws d = draw_realization(model, rng);
        const QuantizedSet qs = quantize_realization(model, d, bits);
        try {
            if (model.precoding == Precoding::zf) {
                const UserSinrs s = extract_sinr(model, d, qs, build_precoder(model, d, qs, 0.0));
                for (auto& slot : per_power) slot = s;
            } else {
                for (std::size_t p = 0; p < powers.size(); ++p)
                    per_power[p] = extract_sinr(model, d, qs, build_precoder(model, d, qs, powers[p]));
            }
        } catch (const DegenerateInput&) {
            ++degenerate;
            continue;
        }
        break;
    }
    for (std::size_t p = 0; p < powers.size(); ++p) visit(p, per_power[p]);
}

inline std::vector<int> user_bit_vector(const SystemModel& model, int bits, std::optional<int> co_user_bits) {
    if (bits < 0) throw std::invalid_argument("bits must be non-negative");
    std::vector<int> v(model.k, co_user_bits.value_or(bits));
    v[0] = bits;
    return v;
}

inline void check_powers(std::span<const double> powers) {
    if (powers.empty()) throw std::invalid_argument("need at least one power");
    for (double p : powers)
        if (!(p >= 0.0)) throw std::invalid_argument("power must be non-negative");
}

}  // namespace detail

/**
 * Rate of user 1 at each power when it feeds back `bits` and the co-users
 * feed back `co_user_bits` (default: the same). Realizations are shared across
 * powers, so the curve is smooth in SNR.
 */
inline std::vector<Estimate> estimate_user_rate_curve(std::span<const double> powers, int bits,
                                                      const SystemModel& model, const MonteCarlo& mc,
                                                      std::optional<int> co_user_bits = std::nullopt) {
    detail::check_powers(powers);
    if (mc.samples == 0) throw std::invalid_argument("need at least one sample");
    const std::vector<int> bit_vec = detail::user_bit_vector(model, bits, co_user_bits);
    const RngStream base = mc.base();
    const auto total = detail::run_chunked<detail::StatVector>(
        mc.samples, mc.workers, [&] { return detail::StatVector{std::vector<RunningStat>(powers.size()), 0}; },
        [&](std::size_t i, detail::StatVector& acc) {
            detail::evaluate_powers(model, powers, bit_vec, base.substream(static_cast<std::uint32_t>(i)),
                                    acc.degenerate, [&](std::size_t p, const UserSinrs& s) {
                                        acc.stats[p].add(instant_rate(s.users[0], powers[p], model.streams()));
                                    });
        });
    std::vector<Estimate> out;
    for (const auto& s : total.stats) out.push_back(s.estimate(total.degenerate));
    return out;
}

inline Estimate estimate_user_rate(double p, int bits, const SystemModel& model, const MonteCarlo& mc,
                                   std::optional<int> co_user_bits = std::nullopt) {
    const double powers[] = {p};
    return estimate_user_rate_curve(powers, bits, model, mc, co_user_bits).front();
}

struct RateSplit {
    Estimate plus;
    Estimate minus;
    Estimate rate;
};

/// R+ and R- for user 1 alongside its rate, from the same realizations.
inline RateSplit estimate_rate_split(double p, int bits, const SystemModel& model, const MonteCarlo& mc,
                                     std::optional<int> co_user_bits = std::nullopt) {
    const double powers[] = {p};
    detail::check_powers(powers);
    const std::vector<int> bit_vec = detail::user_bit_vector(model, bits, co_user_bits);
    const RngStream base = mc.base();
    const auto total = detail::run_chunked<detail::StatVector>(
        mc.samples, mc.workers, [] { return detail::StatVector{std::vector<RunningStat>(3), 0}; },
        [&](std::size_t i, detail::StatVector& acc) {
            detail::evaluate_powers(model, powers, bit_vec, base.substream(static_cast<std::uint32_t>(i)),
                                    acc.degenerate, [&](std::size_t, const UserSinrs& s) {
                                        const RateTerms t = rate_terms(s.users[0], p, model.streams());
                                        acc.stats[0].add(t.plus);
                                        acc.stats[1].add(t.minus);
                                        acc.stats[2].add(instant_rate(s.users[0], p, model.streams()));
                                    });
        });
    return {total.stats[0].estimate(total.degenerate), total.stats[1].estimate(total.degenerate),
            total.stats[2].estimate(total.degenerate)};
}

/**
 * Joint simulation of several strategies at several powers on shared
 * realizations. Optionally tracks paired differences between every pair of
 * strategies, whose confidence intervals benefit from the shared draws.
 */
class SumRateStudy {
  public:
    std::vector<double> powers;
    std::vector<Strategy> strategies;
    std::vector<std::vector<Estimate>> sum_rate;                // [strategy][power]
    std::vector<std::vector<std::vector<Estimate>>> user_rate;  // [strategy][power][user]
    std::size_t degenerate = 0;

    /// Paired estimate of sum_rate[a] - sum_rate[b] at power index p.
    Estimate sum_difference(std::size_t a, std::size_t b, std::size_t p) const {
        return difference(sum_diff_, a, b, p, 0);
    }
    /// Paired estimate of user_rate[a] - user_rate[b] for one user.
    Estimate user_difference(std::size_t a, std::size_t b, std::size_t p, std::size_t user) const {
        return difference(user_diff_, a, b, p, user);
    }
    bool paired() const { return !sum_diff_.empty(); }

  private:
    friend SumRateStudy run_sum_rate_study(std::span<const double>, std::span<const Strategy>,
                                           std::span<const double>, const SystemModel&, const MonteCarlo&, bool);

    using PairTable = std::vector<std::vector<std::vector<Estimate>>>;  // [pair][power][slot]

    std::size_t pair_index(std::size_t a, std::size_t b) const {
        const std::size_t s = strategies.size();
        return a * s - a * (a + 1) / 2 + (b - a - 1);
    }

    Estimate difference(const PairTable& table, std::size_t a, std::size_t b, std::size_t p,
                        std::size_t slot) const {
        if (table.empty()) throw std::logic_error("study was run without paired differences");
        if (a == b) return {0.0, 0.0, sum_rate[a][p].samples, degenerate};
        if (a < b) return table[pair_index(a, b)][p][slot];
        Estimate e = table[pair_index(b, a)][p][slot];
        e.mean = -e.mean;
        return e;
    }

    PairTable sum_diff_;
    PairTable user_diff_;
};

inline SumRateStudy run_sum_rate_study(std::span<const double> powers, std::span<const Strategy> strategies,
                                       std::span<const double> path_loss, const SystemModel& model,
                                       const MonteCarlo& mc, bool paired = true) {
    detail::check_powers(powers);
    if (strategies.empty()) throw std::invalid_argument("need at least one strategy");
    if (mc.samples == 0) throw std::invalid_argument("need at least one sample");
    for (const auto& s : strategies)
        if (s.size() != model.k || !s.valid()) throw std::invalid_argument("invalid strategy " + s.to_string());
    std::vector<double> gamma(model.k, 1.0);
    if (!path_loss.empty()) {
        if (path_loss.size() != model.k) throw std::invalid_argument("path_loss length must equal the user count");
        for (std::size_t u = 0; u < model.k; ++u) {
            if (!(path_loss[u] > 0.0)) throw std::invalid_argument("path losses must be positive");
            gamma[u] = path_loss[u];
        }
    }

    const std::size_t ns = strategies.size();
    const std::size_t np = powers.size();
    const std::size_t nk = model.k;
    const std::size_t pairs = paired ? ns * (ns - 1) / 2 : 0;
    // layout: [strategy][power][0 = sum, 1.. = users], then [pair][power][same slots]
    const std::size_t slots = nk + 1;
    auto index = [&](std::size_t s, std::size_t p, std::size_t slot) { return (s * np + p) * slots + slot; };
    const std::size_t pair_base = ns * np * slots;
    const std::size_t layout = pair_base + pairs * np * slots;

    const bool use_cv = mc.control_variate && model.beams_independent_of_own_channel();
    std::vector<double> cv_mean(np * nk, 0.0);
    if (use_cv)
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t u = 0; u < nk; ++u)
                cv_mean[p * nk + u] =
                    mean_log2_one_plus_exponential(gamma[u] * powers[p] / static_cast<double>(model.streams()));

    // set 0 holds plain rates, set 1 the control-variate adjusted ones
    const std::size_t sets = use_cv ? 2 : 1;
    const std::size_t span_values = ns * np * slots;

    const RngStream base = mc.base();
    const auto total = detail::run_chunked<detail::StatVector>(
        mc.samples, mc.workers, [&] { return detail::StatVector{std::vector<RunningStat>(sets * layout), 0}; },
        [&](std::size_t i, detail::StatVector& acc) {
            std::vector<double> values(sets * span_values);
            RngStream rng = base.substream(static_cast<std::uint32_t>(i));
            for (;;) {
                const RealizationDraws d = draw_realization(model, rng);
                try {
                    for (std::size_t s = 0; s < ns; ++s) {
                        const QuantizedSet qs = quantize_realization(model, d, strategies[s].bits);
                        std::optional<UserSinrs> zf_sinr;
                        if (model.precoding == Precoding::zf)
                            zf_sinr = extract_sinr(model, d, qs, build_precoder(model, d, qs, 0.0));
                        for (std::size_t p = 0; p < np; ++p) {
                            const UserSinrs sinr =
                                zf_sinr ? *zf_sinr : extract_sinr(model, d, qs, build_precoder(model, d, qs, powers[p]));
                            double sum = 0.0;
                            double sum_cv = 0.0;
                            for (std::size_t u = 0; u < nk; ++u) {
                                const SinrSample& su = sinr.users[u];
                                const double r = instant_rate(su, gamma[u] * powers[p], model.streams());
                                values[index(s, p, u + 1)] = r;
                                sum += r;
                                if (use_cv) {
                                    const double rho = gamma[u] * powers[p] / static_cast<double>(model.streams());
                                    const double adjusted =
                                        r + cv_mean[p * nk + u] - std::log1p(rho * su.q * su.x) * std::numbers::log2e;
                                    values[span_values + index(s, p, u + 1)] = adjusted;
                                    sum_cv += adjusted;
                                }
                            }
                            values[index(s, p, 0)] = sum;
                            if (use_cv) values[span_values + index(s, p, 0)] = sum_cv;
                        }
                    }
                } catch (const DegenerateInput&) {
                    ++acc.degenerate;
                    continue;
                }
                break;
            }
            for (std::size_t set = 0; set < sets; ++set) {
                const double* v = values.data() + set * span_values;
                RunningStat* st = acc.stats.data() + set * layout;
                for (std::size_t j = 0; j < span_values; ++j) st[j].add(v[j]);
                if (!paired) continue;
                std::size_t pair = 0;
                for (std::size_t a = 0; a < ns; ++a)
                    for (std::size_t b = a + 1; b < ns; ++b, ++pair)
                        for (std::size_t p = 0; p < np; ++p)
                            for (std::size_t slot = 0; slot < slots; ++slot)
                                st[pair_base + (pair * np + p) * slots + slot].add(v[index(a, p, slot)] -
                                                                                   v[index(b, p, slot)]);
            }
        });

    // per power, the estimator with the smaller total sum-rate variance
    std::vector<std::size_t> offset(np, 0);
    if (use_cv)
        for (std::size_t p = 0; p < np; ++p) {
            double plain = 0.0, adjusted = 0.0;
            for (std::size_t s = 0; s < ns; ++s) {
                plain += total.stats[index(s, p, 0)].variance();
                adjusted += total.stats[layout + index(s, p, 0)].variance();
            }
            if (adjusted < plain) offset[p] = layout;
        }

    SumRateStudy study;
    study.powers.assign(powers.begin(), powers.end());
    study.strategies.assign(strategies.begin(), strategies.end());
    study.degenerate = total.degenerate;
    study.sum_rate.assign(ns, std::vector<Estimate>(np));
    study.user_rate.assign(ns, std::vector<std::vector<Estimate>>(np, std::vector<Estimate>(nk)));
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t p = 0; p < np; ++p) {
            study.sum_rate[s][p] = total.stats[offset[p] + index(s, p, 0)].estimate(total.degenerate);
            for (std::size_t u = 0; u < nk; ++u)
                study.user_rate[s][p][u] = total.stats[offset[p] + index(s, p, u + 1)].estimate(total.degenerate);
        }
    if (paired) {
        study.sum_diff_.assign(pairs, std::vector<std::vector<Estimate>>(np, std::vector<Estimate>(1)));
        study.user_diff_.assign(pairs, std::vector<std::vector<Estimate>>(np, std::vector<Estimate>(nk)));
        for (std::size_t pair = 0; pair < pairs; ++pair)
            for (std::size_t p = 0; p < np; ++p) {
                const auto at = [&](std::size_t slot) {
                    return total.stats[offset[p] + pair_base + (pair * np + p) * slots + slot].estimate(
                        total.degenerate);
                };
                study.sum_diff_[pair][p][0] = at(0);
                for (std::size_t u = 0; u < nk; ++u) study.user_diff_[pair][p][u] = at(u + 1);
            }
    }
    return study;
}

/// Average sum rate sum_k R_k(gamma_k P, b_k) by joint simulation.
inline Estimate estimate_sum_rate(double p, const Strategy& strategy, std::span<const double> path_loss,
                                  const SystemModel& model, const MonteCarlo& mc) {
    const double powers[] = {p};
    const Strategy strategies[] = {strategy};
    return run_sum_rate_study(powers, strategies, path_loss, model, mc, false).sum_rate[0][0];
}

/**
 * TDMA: one user served with full power along its quantized direction,
 * log2(1 + P Q (1 - Z)). Multiplexing gain one for any feedback size.
 */
inline Estimate tdma_rate(double p, int bits, std::size_t m, const MonteCarlo& mc,
                          Codebook codebook = Codebook::rvq) {
    if (!(p >= 0.0)) throw std::invalid_argument("power must be non-negative");
    if (mc.samples == 0) throw std::invalid_argument("need at least one sample");
    const CodebookModel quantizer{codebook, bits, m};
    const RngStream base = mc.base();
    struct Acc {
        RunningStat stat;
        void merge(const Acc& o) { stat.merge(o.stat); }
    };
    const Acc total = detail::run_chunked<Acc>(mc.samples, mc.workers, [] { return Acc{}; },
                                               [&](std::size_t i, Acc& acc) {
                                                   RngStream rng = base.substream(static_cast<std::uint32_t>(i));
                                                   const double q = norm_sq(sample_gaussian_vector(m, rng));
                                                   const double z = sample_error_direct(quantizer, rng);
                                                   acc.stat.add(std::log1p(p * q * (1.0 - z)) * std::numbers::log2e);
                                               });
    return total.stat.estimate();
}

}  // namespace fbshare
