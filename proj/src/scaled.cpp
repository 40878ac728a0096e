#include "blpp/scaled.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blpp {

std::pair<double, double> scale_point(int n, double v1, double v2) {
    const double n23 = pow_2_3(static_cast<double>(n));
    return {(v1 - v2) / (2.0 * n23), v2 / static_cast<double>(n)};
}

std::pair<double, double> unscale_point(int n, double x, double t) {
    const double n23 = pow_2_3(static_cast<double>(n));
    const double v2 = t * static_cast<double>(n);
    return {2.0 * n23 * x + v2, v2};
}

int line_of(int n, double t, double tol) {
    const double raw = t * static_cast<double>(n);
    if (std::abs(raw - std::round(raw)) > tol * static_cast<double>(n))
        throw std::invalid_argument("time coordinate off the 1/n mesh");
    return static_cast<int>(std::llround(raw));
}

GridPointRef locate(const GridSpec& grid, int n, double x, double t) {
    GridPointRef ref;
    ref.line = line_of(n, t);
    const auto [pos, v2] = unscale_point(n, x, t);
    (void)v2;
    if (!grid.contains(pos))
        throw out_of_window_error("scaled point outside the grid window");
    ref.col = grid.nearest_index(pos);
    const double n23 = pow_2_3(static_cast<double>(n));
    ref.x_eff = (grid.position(ref.col) - static_cast<double>(ref.line)) / (2.0 * n23);
    ref.snap_abs = std::abs(ref.x_eff - x);
    return ref;
}

double scale_energy(int n, double energy, int start_line, double start_pos,
                    int end_line, double end_pos) {
    // 2 n^{2/3}(y - x) = (end_pos - end_line) - (start_pos - start_line), so
    // the centering collapses to E - (j - i) - (end_pos - start_pos)
    const double lines = static_cast<double>(end_line - start_line);
    return M_SQRT1_2 / std::cbrt(static_cast<double>(n)) *
           (energy - lines - (end_pos - start_pos));
}

namespace {

void check_triple(int n, ScaledPoint from, ScaledPoint to) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(to.t > from.t)) throw std::invalid_argument("to.t must exceed from.t");
    (void)line_of(n, from.t);
    (void)line_of(n, to.t);
    const double t12 = to.t - from.t;
    if (to.x < from.x - 0.5 * std::cbrt(static_cast<double>(n)) * t12)
        throw no_zigzag_error("no zigzag: endpoint left of the existence cone");
}

}  // namespace

double weight(const BrownianField& field, int n, ScaledPoint from, ScaledPoint to) {
    check_triple(n, from, to);
    const GridPointRef a = locate(field.grid(), n, from.x, from.t);
    const GridPointRef b = locate(field.grid(), n, to.x, to.t);
    if (b.col < a.col) throw no_zigzag_error("no zigzag: snapped end left of start");
    const double e = last_passage_value(field, a.col, a.line, b.col, b.line);
    return scale_energy(n, e, a.line, field.grid().position(a.col), b.line,
                        field.grid().position(b.col));
}

Polymer make_polymer(const BrownianField& field, int n, Staircase s) {
    Polymer p;
    p.n = n;
    const double n23 = pow_2_3(static_cast<double>(n));
    const double sp = field.grid().position(s.start_col);
    const double ep = field.grid().position(s.end_col);
    p.from = {(sp - s.start_line) / (2.0 * n23),
              static_cast<double>(s.start_line) / n};
    p.to = {(ep - s.end_line) / (2.0 * n23), static_cast<double>(s.end_line) / n};
    p.weight = scale_energy(n, staircase_energy(field, s), s.start_line, sp,
                            s.end_line, ep);
    p.staircase = std::move(s);
    return p;
}

Polymer polymer(const BrownianField& field, int n, ScaledPoint from, ScaledPoint to) {
    check_triple(n, from, to);
    const GridPointRef a = locate(field.grid(), n, from.x, from.t);
    const GridPointRef b = locate(field.grid(), n, to.x, to.t);
    if (b.col < a.col) throw no_zigzag_error("no zigzag: snapped end left of start");
    return make_polymer(field, n, geodesic(field, a.col, a.line, b.col, b.line));
}

std::string polymer_to_json(const Polymer& p) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"n\":" << p.n << ",\"from\":[" << p.from.x << "," << p.from.t
       << "],\"to\":[" << p.to.x << "," << p.to.t << "],\"weight\":" << p.weight
       << ",\"jumps\":[";
    for (std::size_t i = 0; i < p.staircase.jumps.size(); ++i) {
        if (i) os << ",";
        os << p.staircase.jumps[i];
    }
    os << "]}";
    return os.str();
}

double polymer_position(const BrownianField& field, const Polymer& p, double t) {
    if (t < p.from.t - 1e-12 || t > p.to.t + 1e-12)
        throw std::invalid_argument("polymer_position: t outside lifetime");
    const int n = p.n;
    const int k = line_of(n, t);
    if (k == p.staircase.start_line) return p.from.x;
    if (k == p.staircase.end_line) return p.to.x;
    auto [lo, hi] = p.staircase.segment(k);
    const double n23 = pow_2_3(static_cast<double>(n));
    const double a = (field.grid().position(lo) - k) / (2.0 * n23);
    const double b = (field.grid().position(hi) - k) / (2.0 * n23);
    const double t12 = p.to.t - p.from.t;
    const double ell = ((p.to.t - t) * p.from.x + (t - p.from.t) * p.to.x) / t12;
    const double da = std::abs(a - ell), db = std::abs(b - ell);
    if (da > db) return a;
    if (db > da) return b;
    return std::max(a, b);  // tie: the point on the >= side
}

bool poly_dev_reg_event(const BrownianField& field, const Polymer& p, double a,
                        double r) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("poly_dev_reg_event: a must lie in (0,1)");
    if (r < 0.0) throw std::invalid_argument("poly_dev_reg_event: r must be >= 0");
    const double t12 = p.to.t - p.from.t;
    const double mesh = a * t12 * static_cast<double>(p.n);
    if (std::abs(mesh - std::round(mesh)) > 1e-9)
        throw std::invalid_argument("poly_dev_reg_event: a*t12*n must be integral");
    const double t = (1.0 - a) * p.from.t + a * p.to.t;
    const double pos = polymer_position(field, p, t);
    const double ell = (1.0 - a) * p.from.x + a * p.to.x;
    const double bound = r * pow_2_3(t12) * pow_2_3(std::min(a, 1.0 - a));
    return std::abs(pos - ell) <= bound;
}

std::vector<std::int64_t> interval_columns(const GridSpec& grid, int n, double lo,
                                           double hi, double t) {
    if (hi < lo) throw std::invalid_argument("interval_columns: empty interval");
    const auto [plo, unused1] = unscale_point(n, lo, t);
    const auto [phi, unused2] = unscale_point(n, hi, t);
    (void)unused1;
    (void)unused2;
    if (!grid.contains(plo) || !grid.contains(phi))
        throw out_of_window_error("interval outside the grid window");
    std::int64_t a = static_cast<std::int64_t>(std::ceil((plo - grid.origin) / grid.spacing - 1e-9));
    std::int64_t b = static_cast<std::int64_t>(std::floor((phi - grid.origin) / grid.spacing + 1e-9));
    a = std::max<std::int64_t>(a, 0);
    b = std::min<std::int64_t>(b, grid.num_points - 1);
    std::vector<std::int64_t> cols;
    if (a > b) {
        cols.push_back(grid.nearest_index(0.5 * (plo + phi)));
        return cols;
    }
    cols.reserve(static_cast<std::size_t>(b - a + 1));
    for (std::int64_t c = a; c <= b; ++c) cols.push_back(c);
    return cols;
}

MaxDisjointResult max_disjoint_polymers(const BrownianField& field, int n,
                                        double i_lo, double i_hi, double t1,
                                        double j_lo, double j_hi, double t2) {
    if (!(t2 > t1)) throw std::invalid_argument("max_disjoint_polymers: t2 <= t1");
    const int li = line_of(n, t1);
    const int lj = line_of(n, t2);
    const auto xs = interval_columns(field.grid(), n, i_lo, i_hi, t1);
    const auto ys = interval_columns(field.grid(), n, j_lo, j_hi, t2);
    MaxDisjointResult r;
    r.family = max_disjoint_staircases(field, xs, li, ys, lj);
    r.count = r.family.count();
    return r;
}

}  // namespace blpp
