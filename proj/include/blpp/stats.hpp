#ifndef BLPP_STATS_HPP
#define BLPP_STATS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "blpp/quilt.hpp"

namespace blpp {

// ---- estimator primitives -------------------------------------------------

struct WilsonInterval {
    double p_hat = 0.0, lo = 0.0, hi = 0.0;
};
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                               double z = 1.959963984540054);

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
    double slope_se = 0.0, ci_lo = 0.0, ci_hi = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double x);
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);
double ks_statistic_vs_normal(std::vector<double> samples, double mu, double sigma);
// asymptotic two-sided p-value for a one-sample statistic at sample size m
double ks_pvalue(double statistic, std::size_t m);
std::vector<bool> benjamini_hochberg(const std::vector<double>& pvals, double q);

double sample_mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);
double sample_quantile(std::vector<double> v, double q);

// deterministic per-trial seeds
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    return hash_combine(master, index + 1);
}

// index-ordered parallel map: results land by index regardless of scheduling
void parallel_for_indexed(int num_threads, std::size_t count,
                          const std::function<void(std::size_t)>& body);

// ---- run configuration ------------------------------------------------------

struct RunConfig {
    int n = 64;
    double window = 4.0;          // scaled half-window X
    double points_per_unit = 4.0; // grid density rho
    bool banded = false;
    int y_points = 201;
    std::string ic_kind = "flat"; // narrow-wedge | flat | slope | random-brownian | csv
    double ic_param = 0.0;        // wedge location / slope gradient / sigma
    double ic_half_width = 3.0;
    double ic_dx = 0.05;
    std::uint64_t ic_seed = 7;
    std::string ic_csv;           // path for ic_kind == "csv"
    double D = 2.5;
    double chi = 0.5;
    int j_max = 4;
    int trials = 200;
    std::uint64_t seed = 1;
    int threads = 1;

    std::string canonical_json() const;
    std::uint64_t config_hash() const;
};

InitialCondition make_initial_condition(const RunConfig& cfg);

// ---- trial harness ----------------------------------------------------------

struct TrialRecord {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double wgt_origin = 0.0;           // Wgt (0,0) -> (0,1)
    double midpoint_dev_unscaled = 0.0;
    double profile_min = 0.0, profile_max = 0.0;
    int canopy_count = 0;
    QuiltReport quilt;
};

struct TrialSet {
    RunConfig config;
    std::vector<TrialRecord> records;
};

// field -> profiles -> forest -> quilt per trial; per-trial errors are
// recorded, never fatal; deterministic for a given (config, seed).
TrialSet run_trials(const RunConfig& cfg);
void write_trials_csv(std::ostream& out, const TrialSet& set);

// ---- batteries ----------------------------------------------------------------

struct TransversalResult {
    std::vector<int> ns;
    std::vector<double> sd_unscaled;
    LinearFit fit;  // log sd vs log n
};
TransversalResult transversal_exponent(const std::vector<int>& ns, int trials_per_n,
                                       double rho, std::uint64_t master_seed,
                                       int threads = 1);

struct WeightTightnessResult {
    std::vector<int> ns;
    std::vector<double> mean, sd, q25, q50, q75;
    std::map<std::pair<int, int>, double> ks;  // pairwise KS distances
    std::vector<std::vector<double>> samples;
};
WeightTightnessResult weight_tightness(const std::vector<int>& ns, int trials_per_n,
                                       double rho, std::uint64_t master_seed,
                                       int threads = 1);

struct BridgeComparisonResult {
    double lag = 0.0;
    double increment_variance_ratio = 0.0;  // vs h (1 - h/(b-a))
    double midpoint_ks = 0.0;
    double midpoint_ks_pvalue = 0.0;
    int calibration_batches = 0;
    int calibration_passed = 0;
    double calibration_ratio_mean = 0.0;
    std::vector<double> raw_pvalues;
    std::vector<bool> bh_flags;
};
BridgeComparisonResult bridge_comparison_suite(int n, int trials, double lag,
                                               double rho, int y_points,
                                               std::uint64_t master_seed,
                                               int calibration_batches = 20,
                                               int threads = 1);

enum class EventKind { poly_dev_reg, late_coal, reg_fluc, normal_coal };

struct EventCurvePoint {
    double param = 0.0;
    std::int64_t occurrences = 0;
    std::int64_t trials = 0;
    WilsonInterval wilson;
};
struct EventFrequencyResult {
    EventKind kind;
    std::vector<EventCurvePoint> points;  // occurrence/failure frequency per value
};
// PolyDevReg: params are r values (failure frequency at a = 1/2).
// LateCoal: params are eps values (occurrence frequency), K fixed.
// RegFluc: params are R values (failure frequency), flat initial condition.
// NormalCoal: params are eps values (failure frequency).
EventFrequencyResult event_frequency(EventKind kind, const std::vector<double>& params,
                                     int trials, int n, double rho, double window,
                                     double K, std::uint64_t master_seed,
                                     int threads = 1);

struct DisjointTailResult {
    int m = 0;
    std::vector<double> eps;
    std::vector<double> p_half_width;  // intervals of half-width eps
    std::vector<double> p_length;      // intervals of length eps
    LinearFit fit_half_width;          // log p vs log eps
    LinearFit fit_length;
};
DisjointTailResult disjoint_tail_exponent(int m, const std::vector<double>& eps_list,
                                          int trials, int n, double rho,
                                          std::uint64_t master_seed, int threads = 1);

// empirical discretization report: mean Wgt(0,0)->(0,1) across grid densities
struct SpacingConvergence {
    std::vector<double> rhos;
    std::vector<double> mean_wgt;
    std::vector<double> se;
};
SpacingConvergence spacing_convergence(int n, const std::vector<double>& rhos,
                                       int trials, std::uint64_t master_seed,
                                       int threads = 1);

}  // namespace blpp

#endif
