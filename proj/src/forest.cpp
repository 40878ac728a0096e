#include "blpp/forest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blpp {

namespace {

void check_comparable(const Staircase& a, const Staircase& b) {
    if (a.start_line != b.start_line || a.end_line != b.end_line)
        throw std::invalid_argument("merge line: staircases span different lines");
}

}  // namespace

int forward_merge_line(const Staircase& a, const Staircase& b) {
    check_comparable(a, b);
    if (a.end_col != b.end_col)
        throw std::invalid_argument("forward_merge_line: distinct endpoints");
    const int steps = a.end_line - a.start_line;
    if (a.start_col == b.start_col && a.jumps == b.jumps) return 0;
    int last_diff = 0;  // relative line of the highest disagreeing jump
    for (int m = steps; m >= 1; --m) {
        if (a.jumps[static_cast<std::size_t>(m - 1)] != b.jumps[static_cast<std::size_t>(m - 1)]) {
            last_diff = m;
            break;
        }
    }
    if (last_diff == 0) return 1;  // jumps agree, starts differ
    return std::min(last_diff + 1, steps);
}

int backward_merge_line(const Staircase& a, const Staircase& b) {
    check_comparable(a, b);
    if (a.start_col != b.start_col)
        throw std::invalid_argument("backward_merge_line: distinct start points");
    const int steps = a.end_line - a.start_line;
    int c = 0;
    while (c < steps &&
           a.jumps[static_cast<std::size_t>(c)] == b.jumps[static_cast<std::size_t>(c)])
        ++c;
    return c;
}

std::optional<std::pair<double, int>> adjusted_dyadic_scale(int n, int j) {
    const double dyadic = std::pow(2.0, 1.5 * static_cast<double>(j));
    int m = static_cast<int>(std::floor(static_cast<double>(n) / dyadic + 1e-9));
    m = std::min(m, n);
    if (m < 1) return std::nullopt;
    const double u = pow_2_3(static_cast<double>(n) / static_cast<double>(m));
    return std::make_pair(u, m);
}

// ---- PolymerForest --------------------------------------------------------

PolymerForest::PolymerForest(const BrownianField& field, int n, InitialCondition f,
                             std::vector<double> y_grid)
    : field_(&field), n_(n), f_(std::move(f)), y_grid_(std::move(y_grid)) {
    if (y_grid_.empty()) throw std::invalid_argument("forest: empty y grid");
    y_cols_.reserve(y_grid_.size());
    for (double y : y_grid_) y_cols_.push_back(locate(field.grid(), n_, y, 1.0).col);
    col_cap_ = *std::max_element(y_cols_.begin(), y_cols_.end());
    const auto [pos_one, v2] = unscale_point(n_, 1.0, 1.0);
    (void)v2;
    if (field.grid().contains(pos_one))
        col_cap_ = std::max(col_cap_, field.grid().nearest_index(pos_one));
    f_paths_.resize(y_grid_.size());
}

void PolymerForest::ensure_sweep() {
    if (sweep_) return;
    const auto rewards = rewarded_columns(field_->grid(), n_, f_);
    if (rewards.empty())
        throw no_admissible_start_error("initial condition has no admissible start");
    for (const auto& [col, g] : rewards) {
        auto [it, inserted] = reward_by_col_.emplace(col, g);
        if (!inserted) it->second = std::max(it->second, g);
    }
    sweep_ = std::make_unique<LastPassageProfile>(LastPassageProfile::from_rewards(
        *field_, rewards, 0, n_, col_cap_, /*keep_backpointers=*/true));
}

const WeightProfile& PolymerForest::profile() {
    if (!profile_) {
        ensure_sweep();
        WeightProfile p;
        p.n = n_;
        p.kind = ProfileKind::f_rewarded;
        p.y_grid = y_grid_;
        p.values.resize(y_grid_.size());
        const double scale = M_SQRT1_2 / std::cbrt(static_cast<double>(n_));
        const std::int64_t edge_lo = field_->first_col(0), edge_hi = field_->last_col(0);
        for (std::size_t j = 0; j < y_cols_.size(); ++j) {
            const double w = field_->grid().position(y_cols_[j]);
            p.values[j] = scale * (sweep_->value_at(y_cols_[j]) - static_cast<double>(n_) - w);
            const std::int64_t u = sweep_->start_of(y_cols_[j]);
            if (u <= edge_lo + 2 || u >= edge_hi - 2) p.untrusted_window = true;
        }
        profile_ = std::move(p);
    }
    return *profile_;
}

const Staircase& PolymerForest::f_path_at(std::size_t y_idx) {
    auto& slot = f_paths_.at(y_idx);
    if (!slot) {
        ensure_sweep();
        slot = sweep_->backtrack(y_cols_[y_idx]);
    }
    return *slot;
}

const LastPassageProfile& PolymerForest::point_sweep(std::int64_t start_col) {
    auto it = point_sweeps_.find(start_col);
    if (it == point_sweeps_.end()) {
        if (point_sweeps_.size() >= kSweepCacheCap) {
            auto victim = point_sweeps_.begin();
            for (auto c = point_sweeps_.begin(); c != point_sweeps_.end(); ++c)
                if (c->second.stamp < victim->second.stamp) victim = c;
            point_sweeps_.erase(victim);
        }
        it = point_sweeps_
                 .emplace(start_col,
                          CachedSweep{LastPassageProfile::from_point(
                                          *field_, start_col, 0, n_,
                                          std::max(col_cap_, start_col)),
                                      sweep_clock_})
                 .first;
    }
    it->second.stamp = ++sweep_clock_;
    return it->second.profile;
}

const Staircase& PolymerForest::point_path(std::int64_t start_col, std::int64_t end_col) {
    const auto key = std::make_pair(start_col, end_col);
    auto it = point_paths_.find(key);
    if (it != point_paths_.end()) return it->second;
    return point_paths_.emplace(key, point_sweep(start_col).backtrack(end_col))
        .first->second;
}

RootedPolymer PolymerForest::f_rewarded_polymer(double y) {
    ensure_sweep();
    const GridPointRef ref = locate(field_->grid(), n_, y, 1.0);
    if (ref.col > col_cap_)
        throw out_of_window_error("f_rewarded_polymer: endpoint beyond the sweep cap");
    Staircase s = sweep_->backtrack(ref.col);
    RootedPolymer rp;
    rp.root_col = s.start_col;
    const double n23 = pow_2_3(static_cast<double>(n_));
    rp.root = field_->grid().position(s.start_col) / (2.0 * n23);
    rp.polymer = make_polymer(*field_, n_, std::move(s));
    // recover f at the chosen start from the reward actually used by the DP
    const auto it = reward_by_col_.find(rp.root_col);
    if (it == reward_by_col_.end())
        throw std::logic_error("f_rewarded_polymer: root off the rewarded columns");
    const double amp = M_SQRT2 * std::cbrt(static_cast<double>(n_));
    const double f_at_root = (it->second - field_->grid().position(rp.root_col)) / amp;
    rp.rewarded_weight = rp.polymer.weight + f_at_root;
    return rp;
}

double PolymerForest::forward_coalescence_time(double x1, double x2, double y) {
    const auto c1 = locate(field_->grid(), n_, x1, 0.0).col;
    const auto c2 = locate(field_->grid(), n_, x2, 0.0).col;
    const auto cy = locate(field_->grid(), n_, y, 1.0).col;
    if (c1 == c2) return 0.0;
    return static_cast<double>(forward_merge_line(point_path(c1, cy), point_path(c2, cy))) /
           static_cast<double>(n_);
}

double PolymerForest::backward_coalescence_time(double y1, double y2) {
    ensure_sweep();
    const auto i1 = locate(field_->grid(), n_, y1, 1.0).col;
    const auto i2 = locate(field_->grid(), n_, y2, 1.0).col;
    Staircase s1 = sweep_->backtrack(i1);
    Staircase s2 = sweep_->backtrack(i2);
    if (s1.start_col != s2.start_col) return 0.0;
    return static_cast<double>(backward_merge_line(s1, s2)) / static_cast<double>(n_);
}

double PolymerForest::backward_coalescence_time_from(double x, double y1, double y2) {
    const auto cx = locate(field_->grid(), n_, x, 0.0).col;
    const auto c1 = locate(field_->grid(), n_, y1, 1.0).col;
    const auto c2 = locate(field_->grid(), n_, y2, 1.0).col;
    return static_cast<double>(
               backward_merge_line(point_path(cx, c1), point_path(cx, c2))) /
           static_cast<double>(n_);
}

int PolymerForest::backward_merge_line_f(std::size_t idx1, std::size_t idx2) {
    const Staircase& s1 = f_path_at(idx1);
    const Staircase& s2 = f_path_at(idx2);
    if (s1.start_col != s2.start_col) return 0;
    return backward_merge_line(s1, s2);
}

CanopyDecomposition PolymerForest::canopy_decomposition(double s) {
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("canopy_decomposition: s must lie in (0,1)");
    int line = static_cast<int>(std::llround(s * static_cast<double>(n_)));
    line = std::clamp(line, 0, n_);
    return canopy_decomposition_at_line(line);
}

CanopyDecomposition PolymerForest::canopy_decomposition_at_line(int level_line) {
    ensure_sweep();
    CanopyDecomposition d;
    d.level_line = level_line;
    d.level = static_cast<double>(level_line) / static_cast<double>(n_);
    const int m = static_cast<int>(y_grid_.size());
    std::vector<int> class_start{0};
    for (int i = 1; i < m; ++i) {
        if (backward_merge_line_f(static_cast<std::size_t>(i - 1),
                                  static_cast<std::size_t>(i)) < level_line)
            class_start.push_back(i);
    }
    d.boundaries.push_back(y_grid_.front());
    for (std::size_t c = 0; c < class_start.size(); ++c) {
        Canopy cn;
        cn.first_idx = class_start[c];
        cn.last_idx = (c + 1 < class_start.size()) ? class_start[c + 1] - 1 : m - 1;
        cn.lo = d.boundaries.back();
        cn.hi = (c + 1 < class_start.size()) ? y_grid_[static_cast<std::size_t>(class_start[c + 1])]
                                             : y_grid_.back();
        const Staircase& first = f_path_at(static_cast<std::size_t>(cn.first_idx));
        cn.root_col = first.start_col;
        cn.root = field_->grid().position(first.start_col) /
                  (2.0 * pow_2_3(static_cast<double>(n_)));
        cn.level = d.level;
        d.boundaries.push_back(cn.hi);
        d.canopies.push_back(cn);
    }
    return d;
}

SpecialSplit PolymerForest::special_point_and_split(const Canopy& canopy, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("special_point_and_split: eps > 0");
    const int level_line = static_cast<int>(std::llround(canopy.level * n_));
    const double ratio = canopy.root / eps;
    const long long i_floor = static_cast<long long>(std::floor(ratio + 1e-9));
    const long long i_ceil = static_cast<long long>(std::ceil(ratio - 1e-9));
    const double r_minus = static_cast<double>(i_floor) * eps;
    const std::int64_t col_minus = locate(field_->grid(), n_, r_minus, 0.0).col;

    SpecialSplit out;
    std::optional<int> hit;
    for (int idx = canopy.first_idx; idx <= canopy.last_idx; ++idx) {
        const std::int64_t ycol = y_cols_[static_cast<std::size_t>(idx)];
        int merge;
        if (col_minus == canopy.root_col) {
            merge = 0;
        } else {
            merge = forward_merge_line(point_path(col_minus, ycol),
                                       point_path(canopy.root_col, ycol));
        }
        if (merge <= level_line) {
            hit = idx;
            break;
        }
    }
    out.special_idx = hit;
    if (!hit) {
        // condition never met: special point is the canopy supremum and the
        // whole canopy reroots to the right mesh neighbour
        out.special_point = canopy.hi;
        SplitPiece piece{canopy.lo, canopy.hi, canopy.first_idx, canopy.last_idx,
                         i_ceil, static_cast<double>(i_ceil) * eps};
        out.pieces.push_back(piece);
        return out;
    }
    out.special_point = y_grid_[static_cast<std::size_t>(*hit)];
    if (*hit > canopy.first_idx) {
        SplitPiece left{canopy.lo, out.special_point, canopy.first_idx, *hit - 1,
                        i_ceil, static_cast<double>(i_ceil) * eps};
        out.pieces.push_back(left);
    }
    SplitPiece right{out.special_point, canopy.hi, *hit, canopy.last_idx, i_floor,
                     static_cast<double>(i_floor) * eps};
    out.pieces.push_back(right);
    return out;
}

LateCoalResult PolymerForest::late_coal_event(double K, double eps,
                                              const std::vector<double>& extra_x) {
    // quarter-mesh scan in x across [-K, K]; forest y grid in y
    std::vector<double> xs;
    if (K >= 0.0 && eps > 0.0) {
        const long long i_lo = static_cast<long long>(std::floor(-K / eps));
        const long long i_hi = static_cast<long long>(std::ceil(K / eps));
        for (long long i = i_lo; i < i_hi; ++i) {
            for (double frac : {0.25, 0.5, 0.75}) {
                const double x = (static_cast<double>(i) + frac) * eps;
                if (x >= -K && x <= K) xs.push_back(x);
            }
        }
    }
    xs.insert(xs.end(), extra_x.begin(), extra_x.end());
    return late_coal_event(K, eps, xs, y_grid_);
}

LateCoalResult PolymerForest::late_coal_event(double K, double eps,
                                              const std::vector<double>& x_grid,
                                              const std::vector<double>& y_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("late_coal_event: eps > 0 required");
    LateCoalResult res;
    const int drop = static_cast<int>(std::llround(std::pow(eps, 1.5) * n_));
    res.line_s = n_ - drop;
    if (res.line_s <= 0) return res;  // degenerate threshold: event pinned false

    for (double x : x_grid) {
        if (x < -K || x > K) continue;
        const long long i = static_cast<long long>(std::floor(x / eps));
        const double x_lo = static_cast<double>(i) * eps;
        const double x_hi = static_cast<double>(i + 1) * eps;
        std::int64_t ca, cb, cc;
        try {
            ca = locate(field_->grid(), n_, x_lo, 0.0).col;
            cb = locate(field_->grid(), n_, x, 0.0).col;
            cc = locate(field_->grid(), n_, x_hi, 0.0).col;
        } catch (const out_of_window_error&) {
            continue;  // mesh neighbour outside the window: skip this x
        }
        if (ca == cb || cb == cc) continue;  // coincident polymers never witness
        const LastPassageProfile& sa = point_sweep(ca);
        const LastPassageProfile& sb = point_sweep(cb);
        const LastPassageProfile& sc = point_sweep(cc);
        for (double y : y_grid) {
            const std::int64_t cy = locate(field_->grid(), n_, y, 1.0).col;
            const Staircase pa = sa.backtrack(cy);
            const Staircase pb = sb.backtrack(cy);
            const int m1 = forward_merge_line(pa, pb);
            if (m1 <= res.line_s) continue;
            const Staircase pc = sc.backtrack(cy);
            const int m2 = forward_merge_line(pb, pc);
            if (m2 <= res.line_s) continue;
            const int m3 = forward_merge_line(pa, pc);
            if (m3 <= res.line_s) continue;
            res.occurred = true;
            if (res.witnesses.size() < 32) res.witnesses.emplace_back(x, y);
        }
    }
    return res;
}

bool PolymerForest::reg_fluc_event(double R) {
    ensure_sweep();
    const std::int64_t col_l = locate(field_->grid(), n_, -1.0, 1.0).col;
    const std::int64_t col_r = locate(field_->grid(), n_, 1.0, 1.0).col;
    const double n23 = pow_2_3(static_cast<double>(n_));
    const std::int64_t u_l = sweep_->start_of(col_l);
    const std::int64_t u_r = sweep_->start_of(col_r);
    const double root_l = field_->grid().position(u_l) / (2.0 * n23);
    const double root_r = field_->grid().position(u_r) / (2.0 * n23);
    const bool ok_l = root_l >= -(R + 1.0);
    const bool ok_r = root_r <= R + 1.0;
    const std::int64_t lo = field_->first_col(0), hi = field_->last_col(0);
    const bool l_at_edge = u_l <= lo + 2;
    const bool r_at_edge = u_r >= hi - 2;
    // an edge root that nevertheless satisfies its bound cannot be trusted:
    // the truncated sup may have clipped a more extreme true root
    if ((l_at_edge && ok_l) || (r_at_edge && ok_r))
        throw untrusted_window_error("reg_fluc_event: root at the window edge");
    return ok_l && ok_r;
}

NormalCoalReport PolymerForest::normal_coal_event(double D, double eps, double chi,
                                                  std::optional<int> level_line) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("normal_coal_event: eps in (0, 1]");
    if (!(D > 0.0) || !(chi > 0.0))
        throw std::invalid_argument("normal_coal_event: D, chi must be positive");
    NormalCoalReport rep;
    rep.K = D * std::cbrt(std::log(1.0 / eps));
    const double avail = window_half_width();
    rep.K_eff = std::max(0.0, std::min(rep.K, avail - eps - 0.05));
    rep.clamped = rep.K_eff < rep.K - 1e-12;

    const int line = level_line ? *level_line
                                : n_ - static_cast<int>(std::llround(std::pow(eps, 1.5) * n_));
    const CanopyDecomposition decomp = canopy_decomposition_at_line(line);
    rep.canopy_count = decomp.canopy_count();
    rep.canopy_bound = std::pow(eps, -1.0 - chi);
    rep.canopy_ok = static_cast<double>(rep.canopy_count) <= rep.canopy_bound;

    // scan the canopy roots along with the quarter-mesh: the rerooting
    // argument is applied at exactly these x values
    std::vector<double> roots;
    roots.reserve(decomp.canopies.size());
    for (const Canopy& c : decomp.canopies)
        if (std::abs(c.root) <= rep.K_eff) roots.push_back(c.root);
    rep.no_late_coal = !late_coal_event(rep.K_eff, eps, roots).occurred;

    try {
        rep.reg_fluc = reg_fluc_event(rep.K_eff - 1.0);
    } catch (const untrusted_window_error&) {
        rep.reg_fluc = false;
        rep.untrusted = true;
    }
    rep.occurred = rep.no_late_coal && rep.reg_fluc && rep.canopy_ok;
    return rep;
}

DyadicSearchResult PolymerForest::dyadic_scale_search(double D, double chi, int j_max) {
    if (j_max < 0) throw std::invalid_argument("dyadic_scale_search: j_max >= 0");
    DyadicSearchResult res;
    for (int j = 0; j <= j_max; ++j) {
        const auto scale = adjusted_dyadic_scale(n_, j);
        if (!scale) break;  // scale unreachable at this n
        const auto [u, m] = *scale;
        const int line = n_ - m;
        NormalCoalReport rep = normal_coal_event(D, 1.0 / u, chi, line);
        res.last_report = rep;
        if (rep.occurred) {
            res.error_flag = false;
            res.gamma = u;
            res.eps = 1.0 / u;
            res.j = j;
            res.level_line = line;
            return res;
        }
    }
    res.error_flag = true;
    return res;
}

double PolymerForest::window_half_width() const {
    const GridSpec& g = field_->grid();
    const double n23 = pow_2_3(static_cast<double>(n_));
    return std::min(-g.origin, g.right_edge() - static_cast<double>(n_)) / (2.0 * n23);
}

std::int64_t PolymerForest::col_at_time0(double x) const {
    return locate(field_->grid(), n_, x, 0.0).col;
}

std::string decomposition_to_json(const CanopyDecomposition& d) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"level\":" << d.level << ",\"level_line\":" << d.level_line
       << ",\"canopy_count\":" << d.canopies.size() << ",\"boundaries\":[";
    for (std::size_t i = 0; i < d.boundaries.size(); ++i) {
        if (i) os << ",";
        os << d.boundaries[i];
    }
    os << "],\"roots\":[";
    for (std::size_t i = 0; i < d.canopies.size(); ++i) {
        if (i) os << ",";
        os << d.canopies[i].root;
    }
    os << "],\"split_pieces\":[";
    for (std::size_t i = 0; i < d.split_pieces.size(); ++i) {
        const auto& p = d.split_pieces[i];
        if (i) os << ",";
        os << "{\"lo\":" << p.lo << ",\"hi\":" << p.hi << ",\"rni\":" << p.rni
           << ",\"reroot_x\":" << p.reroot_x << "}";
    }
    os << "]}";
    return os.str();
}

// ---- single-shot wrappers ---------------------------------------------------

RootedPolymer f_rewarded_polymer(const BrownianField& field, int n,
                                 const InitialCondition& f, double y) {
    PolymerForest forest(field, n, f, {y});
    return forest.f_rewarded_polymer(y);
}

double forward_coalescence_time(const BrownianField& field, int n, double x1,
                                double x2, double y) {
    PolymerForest forest(field, n, InitialCondition::narrow_wedge(0.0), {y});
    return forest.forward_coalescence_time(x1, x2, y);
}

double backward_coalescence_time(const BrownianField& field, int n, double x,
                                 double y1, double y2) {
    PolymerForest forest(field, n, InitialCondition::narrow_wedge(0.0),
                         {std::min(y1, y2), std::max(y1, y2)});
    return forest.backward_coalescence_time_from(x, y1, y2);
}

CanopyDecomposition canopy_decomposition(const BrownianField& field, int n,
                                         const InitialCondition& f, double s,
                                         const std::vector<double>& y_grid) {
    PolymerForest forest(field, n, f, y_grid);
    return forest.canopy_decomposition(s);
}

}  // namespace blpp
