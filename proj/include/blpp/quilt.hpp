#ifndef BLPP_QUILT_HPP
#define BLPP_QUILT_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blpp/forest.hpp"

namespace blpp {

// A profile represented as fabric functions sewn at stitch points: patch i
// carries fabric_i shifted by v_i, v_1 = 0, later shifts forced by
// continuity across the stitch grid points.
struct QuiltSpec {
    double a = -1.0, b = 1.0;
    std::vector<double> y_grid;
    std::vector<std::vector<double>> fabrics;   // one per patch, on y_grid
    std::vector<double> stitch_points;          // strictly increasing, on grid
    std::vector<double> shifts;                 // one per patch, shifts[0] = 0
    std::vector<long long> rni;                 // root neighbour index per patch
    std::vector<std::pair<int, int>> patch_ranges;  // grid index range per patch
    double gamma = 0.0;
};

struct QuiltReport {
    bool error_flag = false;   // dyadic search exhausted: no quilt this trial
    bool pass = false;
    int stitch_count = 0;
    int canopy_count = 0;
    double gamma = 0.0;
    int j = -1;
    double profile_scale = 1.0;  // max(1, max |profile|)
    // sup |profile - sewn quilt| per patch (chained shifts)
    std::vector<double> per_patch_deviation;
    // range of (profile - fabric) per patch: the constancy residual, i.e.
    // deviation after optimal per-patch constant removal
    std::vector<double> per_patch_residual;
    double max_deviation = 0.0;
    double max_residual = 0.0;
    bool clamped = false;
    bool untrusted = false;
};

struct SewnQuilt {
    std::vector<double> values;
    std::vector<double> shifts;
    std::vector<std::pair<int, int>> patch_ranges;
};

// q = f_i + v_i on patch i; v_1 = 0 and each later shift makes q agree
// across the stitch grid point. Fabrics beyond #stitches + 1 are ignored.
SewnQuilt sew_quilt(const std::vector<std::vector<double>>& fabrics,
                    const std::vector<double>& stitch_points,
                    const std::vector<double>& y_grid);

// Full pipeline: dyadic scale search, canopy decomposition at the found
// level, split canopies, fabric per split canopy from its root neighbour
// mesh point, stitches at the interior split-canopy boundaries.
std::pair<std::optional<QuiltSpec>, QuiltReport> decompose_profile(
    const BrownianField& field, int n, const InitialCondition& f, double D,
    double chi, int j_max, const std::vector<double>& y_grid);

// Same, reusing an existing forest (shared DP caches).
std::pair<std::optional<QuiltSpec>, QuiltReport> decompose_profile(
    PolymerForest& forest, double D, double chi, int j_max);

// Per-patch sup deviation between a profile and the sewn quilt; pass iff all
// patches deviate at most tol.
QuiltReport verify_reconstruction(const WeightProfile& profile, const QuiltSpec& quilt,
                                  double tol);

std::string quilt_to_json(const QuiltSpec& q, const QuiltReport& r);
void write_patch_csv(std::ostream& out, const QuiltSpec& q, const QuiltReport& r);

}  // namespace blpp

#endif
