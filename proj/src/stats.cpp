#include "blpp/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace blpp {

// ---- estimator primitives ---------------------------------------------------

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    WilsonInterval w;
    if (trials <= 0) return w;
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nt;
    w.p_hat = p;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = (p + z2 / (2.0 * nt)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
    w.lo = std::max(0.0, center - half);
    w.hi = std::min(1.0, center + half);
    return w;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need >= 2 matched points");
    const double n = static_cast<double>(x.size());
    const double mx = sample_mean(x), my = sample_mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    const double dof = std::max(1.0, n - 2.0);
    f.slope_se = std::sqrt(rss / dof / sxx);
    f.ci_lo = f.slope - 1.959963984540054 * f.slope_se;
    f.ci_hi = f.slope + 1.959963984540054 * f.slope_se;
    return f;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_statistic_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_statistic_vs_normal(std::vector<double> samples, double mu, double sigma) {
    if (samples.empty() || sigma <= 0.0)
        throw std::invalid_argument("ks_statistic_vs_normal: bad input");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = normal_cdf((samples[i] - mu) / sigma);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return d;
}

double ks_pvalue(double statistic, std::size_t m) {
    if (m == 0) return 1.0;
    const double sm = std::sqrt(static_cast<double>(m));
    const double lambda = (sm + 0.12 + 0.11 / sm) * statistic;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

std::vector<bool> benjamini_hochberg(const std::vector<double>& pvals, double q) {
    std::vector<std::size_t> order(pvals.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    const double m = static_cast<double>(pvals.size());
    std::size_t cut = 0;  // number of rejected hypotheses
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (pvals[order[k]] <= q * static_cast<double>(k + 1) / m) cut = k + 1;
    }
    std::vector<bool> reject(pvals.size(), false);
    for (std::size_t k = 0; k < cut; ++k) reject[order[k]] = true;
    return reject;
}

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("sample_mean: empty");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_sd: need >= 2 values");
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double sample_quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("sample_quantile: empty");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - std::floor(pos);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

void parallel_for_indexed(int num_threads, std::size_t count,
                          const std::function<void(std::size_t)>& body) {
    if (num_threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min<int>(num_threads, static_cast<int>(count));
    pool.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// ---- run configuration --------------------------------------------------------

std::string RunConfig::canonical_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["window"] = window;
    j["points_per_unit"] = points_per_unit;
    j["banded"] = banded;
    j["y_points"] = y_points;
    j["ic_kind"] = ic_kind;
    j["ic_param"] = ic_param;
    j["ic_half_width"] = ic_half_width;
    j["ic_dx"] = ic_dx;
    j["ic_seed"] = ic_seed;
    j["ic_csv"] = ic_csv;
    j["D"] = D;
    j["chi"] = chi;
    j["j_max"] = j_max;
    j["trials"] = trials;
    j["seed"] = seed;
    return j.dump();  // keys emitted in sorted order
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(canonical_json()); }

InitialCondition make_initial_condition(const RunConfig& cfg) {
    if (cfg.ic_kind == "narrow-wedge") return InitialCondition::narrow_wedge(cfg.ic_param);
    if (cfg.ic_kind == "flat") return InitialCondition::flat(cfg.ic_half_width, cfg.ic_dx);
    if (cfg.ic_kind == "slope")
        return InitialCondition::slope(cfg.ic_param, cfg.ic_half_width, cfg.ic_dx);
    if (cfg.ic_kind == "random-brownian")
        return InitialCondition::random_brownian(cfg.ic_param, cfg.ic_seed,
                                                 cfg.ic_half_width, cfg.ic_dx);
    throw std::invalid_argument("unknown initial condition kind: " + cfg.ic_kind);
}

// ---- trial harness --------------------------------------------------------------

TrialSet run_trials(const RunConfig& cfg) {
    TrialSet set;
    set.config = cfg;
    set.records.resize(static_cast<std::size_t>(std::max(0, cfg.trials)));
    if (cfg.trials <= 0) return set;
    const GridSpec grid = build_grid(cfg.n, cfg.window, cfg.points_per_unit, cfg.banded);
    const auto y_grid = uniform_grid(-1.0, 1.0, cfg.y_points);
    const InitialCondition ic = make_initial_condition(cfg);

    parallel_for_indexed(cfg.threads, set.records.size(), [&](std::size_t t) {
        TrialRecord& rec = set.records[t];
        rec.seed = trial_seed(cfg.seed, t);
        try {
            const BrownianField field = sample_field(grid, rec.seed);
            rec.wgt_origin = weight(field, cfg.n, {0.0, 0.0}, {0.0, 1.0});
            if (cfg.n % 2 == 0) {
                const Polymer p = polymer(field, cfg.n, {0.0, 0.0}, {0.0, 1.0});
                rec.midpoint_dev_unscaled = 2.0 * pow_2_3(static_cast<double>(cfg.n)) *
                                            polymer_position(field, p, 0.5);
            }
            PolymerForest forest(field, cfg.n, ic, y_grid);
            const WeightProfile& prof = forest.profile();
            rec.profile_min = *std::min_element(prof.values.begin(), prof.values.end());
            rec.profile_max = *std::max_element(prof.values.begin(), prof.values.end());
            auto [quilt, report] = decompose_profile(forest, cfg.D, cfg.chi, cfg.j_max);
            rec.quilt = report;
            rec.canopy_count = report.canopy_count;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
    });
    return set;
}

void write_trials_csv(std::ostream& out, const TrialSet& set) {
    out << "trial,seed,failed,wgt_origin,midpoint_dev,profile_min,profile_max,"
           "canopy_count,gamma,j,stitch_count,error_flag,max_residual,max_deviation,"
           "clamped,untrusted,error\n";
    out.precision(17);
    for (std::size_t t = 0; t < set.records.size(); ++t) {
        const TrialRecord& r = set.records[t];
        out << t << "," << r.seed << "," << (r.failed ? 1 : 0) << "," << r.wgt_origin
            << "," << r.midpoint_dev_unscaled << "," << r.profile_min << ","
            << r.profile_max << "," << r.canopy_count << "," << r.quilt.gamma << ","
            << r.quilt.j << "," << r.quilt.stitch_count << ","
            << (r.quilt.error_flag ? 1 : 0) << "," << r.quilt.max_residual << ","
            << r.quilt.max_deviation << "," << (r.quilt.clamped ? 1 : 0) << ","
            << (r.quilt.untrusted ? 1 : 0) << "," << r.error << "\n";
    }
}

// ---- batteries --------------------------------------------------------------------

TransversalResult transversal_exponent(const std::vector<int>& ns, int trials_per_n,
                                       double rho, std::uint64_t master_seed,
                                       int threads) {
    if (ns.size() < 3)
        throw std::invalid_argument("transversal_exponent: need >= 3 n values");
    if (trials_per_n < 2)
        throw std::invalid_argument("transversal_exponent: insufficient data");
    TransversalResult res;
    res.ns = ns;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        if (n % 2 != 0)
            throw std::invalid_argument("transversal_exponent: n must be even");
        const GridSpec grid = build_grid(n, 0.25, rho, false);
        std::vector<double> devs(static_cast<std::size_t>(trials_per_n));
        parallel_for_indexed(threads, devs.size(), [&](std::size_t t) {
            const auto seed = trial_seed(hash_combine(master_seed, 0x7100 + k), t);
            const BrownianField field = sample_field(grid, seed);
            const Polymer p = polymer(field, n, {0.0, 0.0}, {0.0, 1.0});
            devs[t] = 2.0 * pow_2_3(static_cast<double>(n)) *
                      polymer_position(field, p, 0.5);
        });
        res.sd_unscaled.push_back(sample_sd(devs));
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        lx.push_back(std::log(static_cast<double>(ns[k])));
        ly.push_back(std::log(res.sd_unscaled[k]));
    }
    res.fit = linear_fit(lx, ly);
    return res;
}

WeightTightnessResult weight_tightness(const std::vector<int>& ns, int trials_per_n,
                                       double rho, std::uint64_t master_seed,
                                       int threads) {
    WeightTightnessResult res;
    res.ns = ns;
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const int n = ns[k];
        const GridSpec grid = build_grid(n, 0.25, rho, false);
        std::vector<double> w(static_cast<std::size_t>(trials_per_n));
        parallel_for_indexed(threads, w.size(), [&](std::size_t t) {
            const auto seed = trial_seed(hash_combine(master_seed, 0x7200 + k), t);
            const BrownianField field = sample_field(grid, seed);
            w[t] = weight(field, n, {0.0, 0.0}, {0.0, 1.0});
        });
        res.mean.push_back(sample_mean(w));
        res.sd.push_back(sample_sd(w));
        res.q25.push_back(sample_quantile(w, 0.25));
        res.q50.push_back(sample_quantile(w, 0.5));
        res.q75.push_back(sample_quantile(w, 0.75));
        res.samples.push_back(std::move(w));
    }
    for (std::size_t a = 0; a < ns.size(); ++a)
        for (std::size_t b = a + 1; b < ns.size(); ++b)
            res.ks[{ns[a], ns[b]}] = ks_statistic_two_sample(res.samples[a], res.samples[b]);
    return res;
}

namespace {

// standard Brownian motion on the profile grid; bridge projection of this is
// an exact standard bridge sample
std::vector<double> sample_reference_walk(const std::vector<double>& y_grid,
                                          std::uint64_t seed) {
    std::vector<double> w(y_grid.size(), 0.0);
    for (std::size_t j = 1; j < y_grid.size(); ++j) {
        const double dt = y_grid[j] - y_grid[j - 1];
        w[j] = w[j - 1] + std::sqrt(dt) * counter_gaussian(seed, 0xb1ULL,
                                                           static_cast<std::uint64_t>(j));
    }
    return w;
}

struct BridgeStats {
    double ratio = 0.0;
    double ks = 0.0;
    double ks_p = 1.0;
};

BridgeStats bridge_statistics(const std::vector<std::vector<double>>& bridges,
                              const std::vector<double>& y_grid, double lag) {
    const double span = y_grid.back() - y_grid.front();
    const double dy = y_grid[1] - y_grid[0];
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(lag / dy)));
    const double h = static_cast<double>(stride) * dy;
    std::vector<double> increments, midpoints;
    const std::size_t mid = (y_grid.size() - 1) / 2;
    for (const auto& b : bridges) {
        for (std::size_t j = 0; j + stride < b.size(); j += stride)
            increments.push_back(b[j + stride] - b[j]);
        midpoints.push_back(b[mid]);
    }
    BridgeStats s;
    const double theory = h * (1.0 - h / span);
    double var = 0.0;
    const double m = sample_mean(increments);
    for (double x : increments) var += (x - m) * (x - m);
    var /= static_cast<double>(increments.size() - 1);
    s.ratio = var / theory;
    const double sd_mid = sample_sd(midpoints);
    s.ks = ks_statistic_vs_normal(midpoints, sample_mean(midpoints), sd_mid);
    s.ks_p = ks_pvalue(s.ks, midpoints.size());
    return s;
}

}  // namespace

BridgeComparisonResult bridge_comparison_suite(int n, int trials, double lag,
                                               double rho, int y_points,
                                               std::uint64_t master_seed,
                                               int calibration_batches, int threads) {
    if (trials < 10) throw std::invalid_argument("bridge_comparison_suite: too few profiles");
    BridgeComparisonResult res;
    res.lag = lag;
    const auto y_grid = uniform_grid(-1.0, 1.0, y_points);
    const GridSpec grid = build_grid(n, 1.25, rho, false);

    std::vector<std::vector<double>> bridges(static_cast<std::size_t>(trials));
    parallel_for_indexed(threads, bridges.size(), [&](std::size_t t) {
        const auto seed = trial_seed(hash_combine(master_seed, 0x7300), t);
        const BrownianField field = sample_field(grid, seed);
        const WeightProfile prof = narrow_wedge_profile(field, n, 0.0, y_grid);
        bridges[t] = bridge_project(prof.values);
    });
    const BridgeStats real = bridge_statistics(bridges, y_grid, lag);
    res.increment_variance_ratio = real.ratio;
    res.midpoint_ks = real.ks;
    res.midpoint_ks_pvalue = real.ks_p;
    res.raw_pvalues.push_back(real.ks_p);

    // calibration arm: the same statistics on exact Brownian bridges
    res.calibration_batches = calibration_batches;
    const int per_batch = std::max(40, trials / std::max(1, calibration_batches));
    double ratio_sum = 0.0;
    for (int b = 0; b < calibration_batches; ++b) {
        std::vector<std::vector<double>> calib(static_cast<std::size_t>(per_batch));
        for (int t = 0; t < per_batch; ++t) {
            const auto seed = trial_seed(hash_combine(master_seed, 0x7400 + b),
                                         static_cast<std::uint64_t>(t));
            calib[static_cast<std::size_t>(t)] =
                bridge_project(sample_reference_walk(y_grid, seed));
        }
        const BridgeStats s = bridge_statistics(calib, y_grid, lag);
        ratio_sum += s.ratio;
        res.raw_pvalues.push_back(s.ks_p);
        if (s.ratio >= 0.7 && s.ratio <= 1.3 && s.ks_p >= 0.05) ++res.calibration_passed;
    }
    res.calibration_ratio_mean =
        calibration_batches > 0 ? ratio_sum / calibration_batches : 0.0;
    res.bh_flags = benjamini_hochberg(res.raw_pvalues, 0.1);
    return res;
}

EventFrequencyResult event_frequency(EventKind kind, const std::vector<double>& params,
                                     int trials, int n, double rho, double window,
                                     double K, std::uint64_t master_seed, int threads) {
    EventFrequencyResult res;
    res.kind = kind;
    res.points.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) res.points[i].param = params[i];
    std::vector<std::vector<std::int64_t>> hits(
        params.size(), std::vector<std::int64_t>(static_cast<std::size_t>(trials), 0));

    const GridSpec grid = build_grid(n, window, rho, false);
    const auto y_scan = uniform_grid(-1.0, 1.0, 81);

    parallel_for_indexed(threads, static_cast<std::size_t>(trials), [&](std::size_t t) {
        const auto seed = trial_seed(hash_combine(master_seed, 0x7500), t);
        const BrownianField field = sample_field(grid, seed);
        switch (kind) {
            case EventKind::poly_dev_reg: {
                const Polymer p = polymer(field, n, {0.0, 0.0}, {0.0, 1.0});
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const bool holds = poly_dev_reg_event(field, p, 0.5, params[i]);
                    hits[i][t] = holds ? 0 : 1;  // failure frequency
                }
                break;
            }
            case EventKind::late_coal: {
                PolymerForest forest(field, n, InitialCondition::narrow_wedge(0.0), y_scan);
                for (std::size_t i = 0; i < params.size(); ++i)
                    hits[i][t] = forest.late_coal_event(K, params[i]).occurred ? 1 : 0;
                break;
            }
            case EventKind::reg_fluc: {
                PolymerForest forest(field, n,
                                     InitialCondition::flat(window - 0.5), y_scan);
                for (std::size_t i = 0; i < params.size(); ++i) {
                    bool holds;
                    try {
                        holds = forest.reg_fluc_event(params[i]);
                    } catch (const untrusted_window_error&) {
                        holds = false;
                    }
                    hits[i][t] = holds ? 0 : 1;  // failure frequency
                }
                break;
            }
            case EventKind::normal_coal: {
                PolymerForest forest(field, n,
                                     InitialCondition::flat(window - 0.5), y_scan);
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const auto rep = forest.normal_coal_event(2.5, params[i], 0.5);
                    hits[i][t] = rep.occurred ? 0 : 1;  // failure frequency
                }
                break;
            }
        }
    });

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& pt = res.points[i];
        pt.trials = trials;
        pt.occurrences = std::accumulate(hits[i].begin(), hits[i].end(), std::int64_t{0});
        pt.wilson = wilson_interval(pt.occurrences, pt.trials);
    }
    return res;
}

DisjointTailResult disjoint_tail_exponent(int m, const std::vector<double>& eps_list,
                                          int trials, int n, double rho,
                                          std::uint64_t master_seed, int threads) {
    if (m < 1) throw std::invalid_argument("disjoint_tail_exponent: m >= 1");
    DisjointTailResult res;
    res.m = m;
    res.eps = eps_list;
    double max_eps = 0.0;
    for (double e : eps_list) max_eps = std::max(max_eps, e);
    const GridSpec grid = build_grid(n, std::max(1.0, 2.0 * max_eps), rho, false);

    std::vector<std::vector<std::int64_t>> hit_half(
        eps_list.size(), std::vector<std::int64_t>(static_cast<std::size_t>(trials), 0));
    auto hit_len = hit_half;

    parallel_for_indexed(threads, static_cast<std::size_t>(trials), [&](std::size_t t) {
        const auto seed = trial_seed(hash_combine(master_seed, 0x7600), t);
        const BrownianField field = sample_field(grid, seed);
        for (std::size_t i = 0; i < eps_list.size(); ++i) {
            const double e = eps_list[i];
            const auto half = max_disjoint_polymers(field, n, -e, e, 0.0, -e, e, 1.0);
            if (half.count >= m) hit_half[i][t] = 1;
            const auto len =
                max_disjoint_polymers(field, n, -e / 2, e / 2, 0.0, -e / 2, e / 2, 1.0);
            if (len.count >= m) hit_len[i][t] = 1;
        }
    });

    std::vector<double> lx, ly_half, ly_len;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double k_half = static_cast<double>(
            std::accumulate(hit_half[i].begin(), hit_half[i].end(), std::int64_t{0}));
        const double k_len = static_cast<double>(
            std::accumulate(hit_len[i].begin(), hit_len[i].end(), std::int64_t{0}));
        const double tt = static_cast<double>(trials);
        res.p_half_width.push_back(k_half / tt);
        res.p_length.push_back(k_len / tt);
        lx.push_back(std::log(eps_list[i]));
        // continuity-corrected probabilities keep the log fit finite
        ly_half.push_back(std::log((k_half + 0.5) / (tt + 1.0)));
        ly_len.push_back(std::log((k_len + 0.5) / (tt + 1.0)));
    }
    res.fit_half_width = linear_fit(lx, ly_half);
    res.fit_length = linear_fit(lx, ly_len);
    return res;
}

SpacingConvergence spacing_convergence(int n, const std::vector<double>& rhos,
                                       int trials, std::uint64_t master_seed,
                                       int threads) {
    SpacingConvergence res;
    res.rhos = rhos;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
        const GridSpec grid = build_grid(n, 0.25, rhos[k], false);
        std::vector<double> w(static_cast<std::size_t>(trials));
        parallel_for_indexed(threads, w.size(), [&](std::size_t t) {
            const auto seed = trial_seed(hash_combine(master_seed, 0x7700 + k), t);
            const BrownianField field = sample_field(grid, seed);
            w[t] = weight(field, n, {0.0, 0.0}, {0.0, 1.0});
        });
        res.mean_wgt.push_back(sample_mean(w));
        res.se.push_back(sample_sd(w) / std::sqrt(static_cast<double>(trials)));
    }
    return res;
}

}  // namespace blpp
