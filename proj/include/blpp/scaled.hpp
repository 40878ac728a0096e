#ifndef BLPP_SCALED_HPP
#define BLPP_SCALED_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "blpp/lpp.hpp"

namespace blpp {

// Scaled coordinates: (v1, v2) -> ((v1 - v2) / (2 n^{2/3}), v2 / n). Time
// coordinates live on the 1/n mesh.
struct ScaledPoint {
    double x = 0.0;
    double t = 0.0;
};

std::pair<double, double> scale_point(int n, double v1, double v2);
std::pair<double, double> unscale_point(int n, double x, double t);

// Nearest line index to n*t; throws when t is off the 1/n mesh by more
// than tol.
int line_of(int n, double t, double tol = 1e-9);

// Snap a scaled endpoint onto the environment grid.
struct GridPointRef {
    std::int64_t col = 0;
    int line = 0;
    double x_eff = 0.0;    // scaled coordinate of the snapped grid point
    double snap_abs = 0.0; // |requested - snapped| in scaled units
};
GridPointRef locate(const GridSpec& grid, int n, double x, double t);

// Scaled geodesic with its weight. from/to carry the snapped (effective)
// endpoint coordinates actually used on the grid.
struct Polymer {
    int n = 0;
    ScaledPoint from, to;
    Staircase staircase;
    double weight = 0.0;

    double lifetime() const { return to.t - from.t; }
};

std::string polymer_to_json(const Polymer& p);

// Weight of the best zigzag between scaled endpoints:
//   2^{-1/2} n^{-1/3} (E - 2(j - i) - 2 n^{2/3}(y - x)).
double weight(const BrownianField& field, int n, ScaledPoint from, ScaledPoint to);

// Centering + scaling applied to a known staircase energy (shared by the
// profile sweeps; positions are unscaled grid coordinates).
double scale_energy(int n, double energy, int start_line, double start_pos,
                    int end_line, double end_pos);

Polymer polymer(const BrownianField& field, int n, ScaledPoint from, ScaledPoint to);

Polymer make_polymer(const BrownianField& field, int n, Staircase s);

// Position convention: at interior mesh heights, the point of the horizontal
// segment farthest from the endpoint-interpolating segment, ties resolved
// upward; at the polymer's own endpoints, the endpoint coordinate.
double polymer_position(const BrownianField& field, const Polymer& p, double t);

// |rho(t) - ell(t)| <= r * t12^{2/3} (a ^ (1-a))^{2/3} at t = (1-a)t1 + a t2.
bool poly_dev_reg_event(const BrownianField& field, const Polymer& p, double a,
                        double r);

// Greedy disjoint polymer count between scaled intervals (I, t1) -> (J, t2),
// endpoints resolved onto the grid columns inside the intervals.
struct MaxDisjointResult {
    int count = 0;
    DisjointFamily family;
};
MaxDisjointResult max_disjoint_polymers(const BrownianField& field, int n,
                                        double i_lo, double i_hi, double t1,
                                        double j_lo, double j_hi, double t2);

// Columns of the grid covering the scaled interval [lo, hi] at time t; falls
// back to the single nearest column when the interval straddles no grid point.
std::vector<std::int64_t> interval_columns(const GridSpec& grid, int n, double lo,
                                           double hi, double t);

}  // namespace blpp

#endif
