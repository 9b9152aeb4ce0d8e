// fbshare: rate tables, strategy optimization, verification checks and
// reproduction targets for feedback-rate sharing in ZF MIMO broadcast.

#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fbshare/allocate.hpp"
#include "fbshare/experiment.hpp"
#include "fbshare/io.hpp"
#include "fbshare/quantize.hpp"
#include "fbshare/rate.hpp"
#include "fbshare/rate_table.hpp"

using namespace fbshare;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

// Raw flag values; applied on top of the config file only when given.
struct Flags {
    std::size_t m = 4, k = 4, streams = 0, samples = 100000, workers = 1;
    int total_bits = 24;
    std::uint64_t seed = 1;
    std::string snr, codebook = "rvq", precoder = "zf", stream_beam = "random", out = "results", config;
    std::vector<double> path_loss;
    bool full = false;
    std::map<std::string, CLI::Option*> opts;
};

void add_common(CLI::App& app, Flags& f) {
    f.opts["m"] = app.add_option("--m", f.m, "transmit antennas M");
    f.opts["k"] = app.add_option("--k", f.k, "users K");
    f.opts["total_bits"] = app.add_option("--total-bits", f.total_bits, "sum feedback bits");
    f.opts["snr"] = app.add_option("--snr", f.snr, "SNR grid start:step:stop in dB");
    f.opts["samples"] = app.add_option("--samples", f.samples, "Monte Carlo samples per cell");
    f.opts["seed"] = app.add_option("--seed", f.seed, "random seed");
    f.opts["codebook"] = app.add_option("--codebook", f.codebook, "rvq or cap");
    f.opts["precoder"] = app.add_option("--precoder", f.precoder, "zf or rzf");
    f.opts["stream_beam"] = app.add_option("--stream-beam", f.stream_beam, "ZF beams when S < M: random or pinv");
    f.opts["path_loss"] = app.add_option("--path-loss", f.path_loss, "per-user path losses (linear)")->delimiter(',');
    f.opts["streams"] = app.add_option("--streams", f.streams, "served streams S (0: all K)");
    f.opts["out"] = app.add_option("--out", f.out, "output directory");
    f.opts["full"] = app.add_flag("--full", f.full, "raise samples to 1e6 per cell");
    f.opts["workers"] = app.add_option("--workers", f.workers, "worker threads");
    f.opts["config"] = app.add_option("--config", f.config, "JSON config file (flags override it)");
}

bool given(const Flags& f, const std::string& name) { return f.opts.at(name)->count() > 0; }

ExperimentConfig resolve(const Flags& f) {
    ExperimentConfig c;
    if (given(f, "config")) apply_json(c, read_json_file(f.config));
    try {
        if (given(f, "m")) c.m = f.m;
        if (given(f, "k")) c.k = f.k;
        if (given(f, "total_bits")) c.total_bits = f.total_bits;
        if (given(f, "snr")) c.snr = parse_snr_range(f.snr);
        if (given(f, "samples")) c.samples = f.samples;
        if (given(f, "seed")) c.seed = f.seed;
        if (given(f, "codebook")) c.codebook = parse_codebook(f.codebook);
        if (given(f, "precoder")) c.precoding = parse_precoding(f.precoder);
        if (given(f, "stream_beam")) c.stream_beam = parse_stream_beam(f.stream_beam);
        if (given(f, "path_loss")) c.path_loss = f.path_loss;
        if (given(f, "streams")) c.streams = f.streams;
        if (given(f, "out")) c.out = f.out;
        if (given(f, "full")) c.full = f.full;
        if (given(f, "workers")) c.workers = f.workers;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

TableConfig table_config(const ExperimentConfig& c, std::vector<double> grid) {
    TableConfig tc;
    tc.meta = c.table_meta(c.served());
    tc.snr_db = std::move(grid);
    tc.max_bits = c.total_bits;
    tc.workers = c.workers;
    return tc;
}

int cmd_rate_table(const ExperimentConfig& c) {
    const TableConfig tc = table_config(c, c.snr_db({-5.0, 1.0, 35.0}));
    bool reused = false;
    const RateTable t = load_or_build(tc, std::filesystem::path(c.out) / "cache", &reused);
    std::printf("table: %s\n", cache_path(tc, std::filesystem::path(c.out) / "cache").string().c_str());
    std::printf("cache: %s\n", reused ? "reused" : "built");
    std::printf("M=%zu S=%zu codebook=%s precoder=%s samples=%zu seed=%llu snr=[%g, %g] dB (%zu points) bits=0..%d "
                "degenerate=%zu\n",
                t.meta.m, t.meta.streams, to_string(t.meta.codebook), to_string(t.meta.precoding), t.meta.samples,
                static_cast<unsigned long long>(t.meta.seed), t.snr_db.front(), t.snr_db.back(), t.snr_db.size(),
                t.max_bits(), t.degenerate);
    return kExitOk;
}

int cmd_optimize(const ExperimentConfig& c) {
    const std::size_t served = c.served();
    std::vector<double> gains;
    if (!c.path_loss.empty()) {
        for (std::size_t i : users_by_path_loss(c.path_loss))
            if (gains.size() < served) gains.push_back(c.path_loss[i]);
    }
    const auto grid = c.snr_db({0.0, 1.0, 35.0});
    double below = 0.0, above = 0.0;
    for (double g : gains) {
        below = std::max(below, -linear_to_db(g));
        above = std::max(above, linear_to_db(g));
    }
    const double step = c.snr.value_or(SnrRange{}).step;
    const auto table_grid =
        snr_grid(grid.front() - std::ceil(below / step) * step, step, grid.back() + std::ceil(above / step) * step);
    const RateTable t = load_or_build(table_config(c, table_grid), std::filesystem::path(c.out) / "cache");

    std::vector<CsvRow> rows;
    std::printf("snr_db,strategy,sum_rate\n");
    for (double db : grid) {
        const AllocationResult r = optimize(t, c.total_bits, gains, db);
        std::printf("%g,%s,%.6f\n", db, r.strategy.to_string().c_str(), r.sum_rate);
        rows.push_back({db, r.strategy.label(), r.sum_rate, detail::table_sum_ci(t, r.strategy, gains, db)});
    }
    write_csv(std::filesystem::path(c.out) / "optimize.csv", rows);
    return kExitOk;
}

int report(bool ok, const std::string& what) {
    std::printf("%s: %s\n", ok ? "PASS" : "FAIL", what.c_str());
    return ok ? kExitOk : kExitCheckFailed;
}

int verify_convexity(std::size_t m, int bmax, bool concave) {
    bool ok = true;
    for (int b = 0; b + 2 <= bmax; ++b) {
        const double d0 = concave ? mean_log2_error(b + 1, m) - mean_log2_error(b, m)
                                  : mean_error(b + 1, m) - mean_error(b, m);
        const double d1 = concave ? mean_log2_error(b + 2, m) - mean_log2_error(b + 1, m)
                                  : mean_error(b + 2, m) - mean_error(b + 1, m);
        const bool step_ok = concave ? d1 < d0 : d1 > d0;
        if (!step_ok) {
            std::printf("  violation at b=%d: %.17g -> %.17g\n", b, d0, d1);
            ok = false;
        }
    }
    return report(ok, std::string(concave ? "E[log2 Z] forward differences strictly decreasing"
                                          : "E[Z] forward differences strictly increasing") +
                          " for b=0.." + std::to_string(bmax) + ", M=" + std::to_string(m));
}

int verify_lemma2(const ExperimentConfig& c, int bits) {
    const auto grid = c.snr_db({0.0, 10.0, 20.0});
    std::vector<int> own(c.k, bits), others(c.k, 0);
    others[0] = bits;
    const std::vector<Strategy> strategies = {Strategy(own), Strategy(others)};
    const SumRateStudy st = run_sum_rate_study(detail::to_powers(grid), strategies, {},
                                               {c.m, c.k, c.codebook, c.precoding, c.stream_beam}, c.monte_carlo(), true);
    bool ok = true;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Estimate& a = st.user_rate[0][p][0];
        const Estimate& b = st.user_rate[1][p][0];
        const bool same = std::abs(a.mean - b.mean) <= 2.0 * std::max(a.ci95, b.ci95);
        std::printf("  %g dB: user-1 rate %.5f (+-%.5f) vs %.5f (+-%.5f) %s\n", grid[p], a.mean, a.ci95, b.mean,
                    b.ci95, same ? "equal" : "DIFFERENT");
        ok = ok && same;
    }
    return report(ok, "user-1 rate unaffected by co-user feedback " + strategies[0].to_string() + " vs " +
                          strategies[1].to_string());
}

int verify_counts(std::size_t k) {
    for (int t = 8; t <= 64; t += 8) std::printf("  total %d: %zu strategies\n", t, enumerate_strategies(k, t).size());
    if (k != 4) return report(true, "counts listed");
    const std::vector<std::size_t> expected = {15, 64, 169, 351, 632, 1033, 1575, 2280};
    bool ok = true;
    for (int i = 0; i < 8; ++i) ok = ok && enumerate_strategies(4, 8 * (i + 1)).size() == expected[i];
    return report(ok, "K=4 counts {15, 64, 169, 351, 632, 1033, 1575, 2280}");
}

int verify_proxies(const ExperimentConfig& c) {
    const ProxyReport r = verify_objective_proxies(c.k, c.total_bits, c.m);
    std::printf("  argmin sum E[Z] = %s, argmin sum E[log2 Z] = %s\n", r.argmin_mean_error.to_string().c_str(),
                r.argmin_mean_log2_error.to_string().c_str());
    return report(r.passed, "proxy optima are the equal and the single-user splits");
}

int verify_ordering(const ExperimentConfig& c, const std::string& regime) {
    if (regime != "low" && regime != "high") throw ConfigError("--regime must be low or high");
    const double db = c.snr ? c.snr->start : (regime == "low" ? -15.0 : 55.0);
    const int b_bar = c.total_bits / static_cast<int>(c.k);
    const Strategy even = optimal_low_snr(c.k, b_bar);
    const Strategy single = optimal_high_snr(c.k, b_bar);
    std::vector<std::pair<Strategy, Strategy>> pairs;
    for (const Strategy& s : enumerate_strategies(c.k, c.total_bits)) {
        if (s != even) pairs.emplace_back(even, s);
        if (s != single && s != even) pairs.emplace_back(s, single);
    }
    const OrderingReport r = verify_theorem_ordering(pairs, db, regime == "low",
                                                     {c.m, c.k, c.codebook, c.precoding, c.stream_beam}, c.monte_carlo());
    for (const auto& chk : r.checks)
        if (!chk.passed)
            std::printf("  %s vs %s: difference %.5f +- %.5f\n", chk.more_even.to_string().c_str(),
                        chk.more_skewed.to_string().c_str(), chk.difference.mean, chk.difference.ci95);
    return report(r.passed(), std::to_string(r.checks.size()) + " comparable pairs ordered for the " + regime +
                                  "-SNR regime at " + std::to_string(db) + " dB");
}

int run_guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback-rate sharing for ZF MIMO broadcast channels"};
    app.require_subcommand(1);
    int status = kExitOk;

    Flags table_flags;
    auto* rate_table = app.add_subcommand("rate-table", "build or reuse a cached per-user rate table");
    add_common(*rate_table, table_flags);
    rate_table->callback([&] { status = run_guarded([&] { return cmd_rate_table(resolve(table_flags)); }); });

    Flags opt_flags;
    auto* opt = app.add_subcommand("optimize", "search the best bit split at each SNR");
    add_common(*opt, opt_flags);
    opt->callback([&] { status = run_guarded([&] { return cmd_optimize(resolve(opt_flags)); }); });

    Flags verify_flags;
    std::string check;
    int bmax = 30;
    int bits = 10;
    std::string regime = "low";
    auto* verify = app.add_subcommand("verify", "run a named check; exit 1 on failure");
    verify->add_option("check", check, "convexity|concavity|lemma2|counts|proxies|ordering")
        ->required()
        ->check(CLI::IsMember({"convexity", "concavity", "lemma2", "counts", "proxies", "ordering"}));
    add_common(*verify, verify_flags);
    verify->add_option("--bmax", bmax, "largest bit count for convexity checks");
    verify->add_option("--bits", bits, "user-1 bits for lemma2");
    verify->add_option("--regime", regime, "low or high (ordering)");
    verify->callback([&] {
        status = run_guarded([&] {
            const ExperimentConfig c = resolve(verify_flags);
            if (check == "convexity") return verify_convexity(c.m, bmax, false);
            if (check == "concavity") return verify_convexity(c.m, bmax, true);
            if (check == "lemma2") return verify_lemma2(c, bits);
            if (check == "counts") return verify_counts(c.k);
            if (check == "proxies") return verify_proxies(c);
            return verify_ordering(c, regime);
        });
    });

    Flags repro_flags;
    std::string target;
    auto* repro = app.add_subcommand("reproduce", "regenerate a table or figure data set");
    repro->add_option("target", target, "table1|table2|table3|fig2|fig3|fig4|fig5|fig7|fig8")
        ->required()
        ->check(CLI::IsMember(reproduce_targets()));
    add_common(*repro, repro_flags);
    repro->callback([&] {
        status = run_guarded([&] {
            const TargetOutput out = reproduce(target, resolve(repro_flags));
            for (const auto& f : out.files) std::printf("wrote %s\n", f.string().c_str());
            std::printf("%s\n", out.summary.dump(1).c_str());
            return kExitOk;
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    return status;
}
