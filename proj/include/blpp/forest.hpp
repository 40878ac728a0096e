#ifndef BLPP_FOREST_HPP
#define BLPP_FOREST_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blpp/profiles.hpp"

namespace blpp {

// Grid coalescence is path coincidence (shared jump structure), not
// geometric point contact. Both staircases must share start/end lines.
//
// forward: both end at the same point; returns the lowest line k such that
// the jump structure coincides from line k upward (0 = identical paths,
// n = meet only at the endpoint).
int forward_merge_line(const Staircase& a, const Staircase& b);

// backward: both begin at the same point; returns the highest line k such
// that the jump structure coincides from the bottom up through line k.
int backward_merge_line(const Staircase& a, const Staircase& b);

struct RootedPolymer {
    Polymer polymer;
    double root = 0.0;            // scaled start location
    std::int64_t root_col = 0;
    double rewarded_weight = 0.0; // weight + f(root)
};

struct Canopy {
    double lo = 0.0, hi = 0.0;    // open interval (grid-resolved boundaries)
    int first_idx = 0, last_idx = 0;  // member range in the y grid
    double root = 0.0;
    std::int64_t root_col = 0;
    double level = 0.0;
};

struct SplitPiece {
    double lo = 0.0, hi = 0.0;
    int first_idx = 0, last_idx = 0;
    long long rni = 0;       // root neighbour index on the eps-mesh
    double reroot_x = 0.0;   // rni * eps
};

struct SpecialSplit {
    double special_point = 0.0;
    std::optional<int> special_idx;  // member index where the scan succeeded
    std::vector<SplitPiece> pieces;
};

struct CanopyDecomposition {
    double level = 0.0;
    int level_line = 0;
    std::vector<Canopy> canopies;
    std::vector<double> boundaries;  // zeta: -1 = first, +1 = last
    std::vector<SplitPiece> split_pieces;
    int canopy_count() const { return static_cast<int>(canopies.size()); }
};

std::string decomposition_to_json(const CanopyDecomposition& d);

struct LateCoalResult {
    bool occurred = false;
    int line_s = 0;
    std::vector<std::pair<double, double>> witnesses;  // (x, y)
};

struct NormalCoalReport {
    bool occurred = false;
    bool no_late_coal = false;
    bool reg_fluc = false;
    bool canopy_ok = false;
    int canopy_count = 0;
    double canopy_bound = 0.0;
    double K = 0.0, K_eff = 0.0;
    bool clamped = false;    // K reduced to fit the window
    bool untrusted = false;  // a RegFluc root reached the window edge
};

struct DyadicSearchResult {
    bool error_flag = true;
    double gamma = 0.0;  // mesh-adjusted 2^j on success
    double eps = 0.0;    // 1 / gamma
    int j = -1;
    int level_line = 0;  // n - n * eps^{3/2}, exact
    NormalCoalReport last_report;
};

// Shared per-trial machinery: one rewarded DP sweep for the f-rewarded
// profile and its polymers, plus cached point-start sweeps for coalescence
// queries. Immutable field; safe to treat as a per-trial scratch object.
class PolymerForest {
  public:
    PolymerForest(const BrownianField& field, int n, InitialCondition f,
                  std::vector<double> y_grid);

    const BrownianField& field() const { return *field_; }
    int n() const { return n_; }
    const InitialCondition& initial_condition() const { return f_; }
    const std::vector<double>& y_grid() const { return y_grid_; }
    const WeightProfile& profile();

    RootedPolymer f_rewarded_polymer(double y);
    const Staircase& f_path_at(std::size_t y_idx);
    const Staircase& point_path(std::int64_t start_col, std::int64_t end_col);
    // sweep lookup without path caching (bulk scans)
    const LastPassageProfile& point_sweep(std::int64_t start_col);

    double forward_coalescence_time(double x1, double x2, double y);
    double backward_coalescence_time(double y1, double y2);  // f-rewarded start
    double backward_coalescence_time_from(double x, double y1, double y2);
    int backward_merge_line_f(std::size_t idx1, std::size_t idx2);

    CanopyDecomposition canopy_decomposition(double s);
    CanopyDecomposition canopy_decomposition_at_line(int level_line);
    SpecialSplit special_point_and_split(const Canopy& canopy, double eps);

    LateCoalResult late_coal_event(double K, double eps,
                                   const std::vector<double>& x_grid,
                                   const std::vector<double>& y_grid);
    // default scan grids: quarter-mesh in x (plus any extra points, e.g.
    // canopy roots), the forest y grid in y
    LateCoalResult late_coal_event(double K, double eps,
                                   const std::vector<double>& extra_x = {});

    bool reg_fluc_event(double R);

    NormalCoalReport normal_coal_event(double D, double eps, double chi,
                                       std::optional<int> level_line = {});

    DyadicSearchResult dyadic_scale_search(double D, double chi, int j_max);

    // largest scaled |x| with both (x,0) and (x,1) preimages on the grid
    double window_half_width() const;
    std::int64_t col_at_time0(double x) const;

  private:
    void ensure_sweep();

    const BrownianField* field_;
    int n_;
    InitialCondition f_;
    std::vector<double> y_grid_;
    std::vector<std::int64_t> y_cols_;
    std::unique_ptr<LastPassageProfile> sweep_;  // rewarded, with backpointers
    std::optional<WeightProfile> profile_;
    std::vector<std::optional<Staircase>> f_paths_;
    // point-start sweeps, LRU-bounded: each carries per-line backpointers
    struct CachedSweep {
        LastPassageProfile profile;
        std::uint64_t stamp;
    };
    std::map<std::int64_t, CachedSweep> point_sweeps_;
    std::uint64_t sweep_clock_ = 0;
    static constexpr std::size_t kSweepCacheCap = 64;
    std::map<std::pair<std::int64_t, std::int64_t>, Staircase> point_paths_;
    std::map<std::int64_t, double> reward_by_col_;
    std::int64_t col_cap_ = 0;
};

// Convenience single-shot wrappers mirroring the operation signatures.
RootedPolymer f_rewarded_polymer(const BrownianField& field, int n,
                                 const InitialCondition& f, double y);
double forward_coalescence_time(const BrownianField& field, int n, double x1,
                                double x2, double y);
double backward_coalescence_time(const BrownianField& field, int n, double x,
                                 double y1, double y2);
CanopyDecomposition canopy_decomposition(const BrownianField& field, int n,
                                         const InitialCondition& f, double s,
                                         const std::vector<double>& y_grid);

// Mesh-adjusted dyadic scale: the smallest u >= 2^j with n u^{-3/2} integral,
// as (u, n * u^{-3/2}); nullopt when even m = 1 cannot be reached.
std::optional<std::pair<double, int>> adjusted_dyadic_scale(int n, int j);

}  // namespace blpp

#endif
