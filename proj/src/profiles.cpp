#include "blpp/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blpp {

InitialCondition::InitialCondition(double x_first, double dx, std::vector<double> values,
                                   PsiTriple psi)
    : x_first_(x_first), dx_(dx), values_(std::move(values)), psi_(psi) {
    if (values_.empty())
        throw std::invalid_argument("initial condition: empty sample set");
    if (dx_ <= 0.0 && values_.size() > 1)
        throw std::invalid_argument("initial condition: dx must be > 0");
    label_ = "samples";
}

InitialCondition InitialCondition::narrow_wedge(double x0) {
    InitialCondition f(x0, 1.0, {0.0}, PsiTriple{1.0, std::max(1.0, std::abs(x0)), 1.0});
    f.label_ = "narrow-wedge(" + std::to_string(x0) + ")";
    return f;
}

InitialCondition InitialCondition::flat(double half_width, double dx) {
    const int m = std::max(2, static_cast<int>(std::round(2.0 * half_width / dx)) + 1);
    InitialCondition f(-half_width, 2.0 * half_width / (m - 1),
                       std::vector<double>(static_cast<std::size_t>(m), 0.0),
                       PsiTriple{1.0, 1.0, 1.0});
    f.label_ = "flat(" + std::to_string(half_width) + ")";
    return f;
}

InitialCondition InitialCondition::slope(double gradient, double half_width, double dx) {
    const int m = std::max(2, static_cast<int>(std::round(2.0 * half_width / dx)) + 1);
    const double step = 2.0 * half_width / (m - 1);
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = gradient * (-half_width + i * step);
    InitialCondition f(-half_width, step, std::move(v),
                       PsiTriple{std::max(1.0, std::abs(gradient)), 1.0,
                                 std::max(1.0, std::abs(gradient) + 1.0)});
    f.label_ = "slope(" + std::to_string(gradient) + ")";
    return f;
}

InitialCondition InitialCondition::random_brownian(double sigma, std::uint64_t seed,
                                                   double half_width, double dx) {
    const int m = std::max(2, static_cast<int>(std::round(2.0 * half_width / dx)) + 1);
    const double step = 2.0 * half_width / (m - 1);
    std::vector<double> v(static_cast<std::size_t>(m), 0.0);
    for (int i = 1; i < m; ++i)
        v[static_cast<std::size_t>(i)] =
            v[static_cast<std::size_t>(i - 1)] +
            sigma * std::sqrt(step) * counter_gaussian(seed, 0x1cULL, static_cast<std::uint64_t>(i));
    // anchor at the sample nearest the origin
    const int i0 = std::clamp(static_cast<int>(std::round(half_width / step)), 0, m - 1);
    const double shift = v[static_cast<std::size_t>(i0)];
    double peak = 0.0;
    for (auto& x : v) {
        x -= shift;
        peak = std::max(peak, std::abs(x));
    }
    InitialCondition f(-half_width, step, std::move(v),
                       PsiTriple{std::max(1.0, peak), std::max(1.0, half_width),
                                 std::max(1.0, peak + 1.0)});
    f.label_ = "random-brownian(" + std::to_string(sigma) + ")";
    return f;
}

InitialCondition InitialCondition::from_csv(std::istream& in, PsiTriple psi) {
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x;
        std::string tok;
        if (!(ls >> x >> tok)) continue;
        double v;
        if (tok == "-inf" || tok == "-INF" || tok == "-Inf") {
            v = kMinusInf;
        } else {
            v = std::stod(tok);
        }
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 1) throw std::invalid_argument("initial condition csv: no samples");
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double d1 = xs[i] - xs[i - 1], d2 = xs[i + 1] - xs[i];
        if (std::abs(d1 - d2) > 1e-9)
            throw std::invalid_argument("initial condition csv: non-uniform grid");
    }
    const double dx = xs.size() > 1 ? xs[1] - xs[0] : 1.0;
    InitialCondition f(xs.front(), dx, std::move(vs), psi);
    f.label_ = "csv";
    return f;
}

ValidationReport validate_initial_condition(const InitialCondition& f) {
    ValidationReport rep;
    if (f.size() == 0) throw std::invalid_argument("empty sample set");
    const auto& psi = f.psi();
    double best_in_core = kMinusInf;
    bool any_finite = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = f.value(i);
        if (is_minus_inf(v)) continue;
        any_finite = true;
        const double x = f.sample_x(i);
        if (v > psi.psi1 * (1.0 + std::abs(x))) {
            std::ostringstream os;
            os << "growth bound violated at x=" << x << ": f=" << v << " > "
               << psi.psi1 * (1.0 + std::abs(x));
            rep.violations.push_back(os.str());
        }
        if (std::abs(x) <= psi.psi2) best_in_core = std::max(best_in_core, v);
    }
    if (!any_finite) rep.violations.push_back("no finite sample anywhere");
    if (is_minus_inf(best_in_core) || best_in_core <= -psi.psi3)
        rep.violations.push_back("no finite sample above -Psi3 on [-Psi2, Psi2]");
    rep.ok = rep.violations.empty();
    return rep;
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 2 || hi <= lo) throw std::invalid_argument("uniform_grid: bad range");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return g;
}

namespace {

std::vector<std::int64_t> y_columns(const GridSpec& grid, int n,
                                    const std::vector<double>& y_grid) {
    std::vector<std::int64_t> cols;
    cols.reserve(y_grid.size());
    for (double y : y_grid) {
        const auto [pos, v2] = unscale_point(n, y, 1.0);
        (void)v2;
        if (!grid.contains(pos))
            throw out_of_window_error("profile endpoint outside the grid window");
        cols.push_back(grid.nearest_index(pos));
    }
    return cols;
}

}  // namespace

WeightProfile narrow_wedge_profile(const BrownianField& field, int n, double x0,
                                   const std::vector<double>& y_grid) {
    if (y_grid.empty()) throw std::invalid_argument("narrow_wedge_profile: empty y grid");
    const GridPointRef start = locate(field.grid(), n, x0, 0.0);
    const auto cols = y_columns(field.grid(), n, y_grid);
    const std::int64_t cap = *std::max_element(cols.begin(), cols.end());
    auto dp = LastPassageProfile::from_point(field, start.col, 0, n, cap,
                                             /*keep_backpointers=*/false);
    WeightProfile p;
    p.n = n;
    p.kind = ProfileKind::narrow_wedge;
    p.x0 = start.x_eff;
    p.y_grid = y_grid;
    p.values.resize(y_grid.size());
    const double spos = field.grid().position(start.col);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        p.values[j] = scale_energy(n, dp.value_at(cols[j]), 0, spos, n,
                                   field.grid().position(cols[j]));
    }
    return p;
}

std::vector<std::pair<std::int64_t, double>> rewarded_columns(
    const GridSpec& grid, int n, const InitialCondition& f) {
    const double amp = M_SQRT2 * std::cbrt(static_cast<double>(n));
    std::vector<std::pair<std::int64_t, double>> out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = f.value(i);
        if (is_minus_inf(v)) continue;
        const auto [pos, v2] = unscale_point(n, f.sample_x(i), 0.0);
        (void)v2;
        if (!grid.contains(pos)) continue;  // sup truncated to the window
        const std::int64_t col = grid.nearest_index(pos);
        out.emplace_back(col, grid.position(col) + amp * v);
    }
    return out;
}

WeightProfile f_rewarded_profile(const BrownianField& field, int n,
                                 const InitialCondition& f,
                                 const std::vector<double>& y_grid) {
    if (y_grid.empty()) throw std::invalid_argument("f_rewarded_profile: empty y grid");
    const auto rewards = rewarded_columns(field.grid(), n, f);
    if (rewards.empty())
        throw no_admissible_start_error("initial condition has no admissible start");
    const auto cols = y_columns(field.grid(), n, y_grid);
    const std::int64_t cap = *std::max_element(cols.begin(), cols.end());
    auto dp = LastPassageProfile::from_rewards(field, rewards, 0, n, cap,
                                               /*keep_backpointers=*/true);
    WeightProfile p;
    p.n = n;
    p.kind = ProfileKind::f_rewarded;
    p.y_grid = y_grid;
    p.values.resize(y_grid.size());
    const double scale = M_SQRT1_2 / std::cbrt(static_cast<double>(n));
    const std::int64_t edge_lo = field.first_col(0), edge_hi = field.last_col(0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const double w = field.grid().position(cols[j]);
        p.values[j] = scale * (dp.value_at(cols[j]) - static_cast<double>(n) - w);
        const std::int64_t u = dp.start_of(cols[j]);
        if (u <= edge_lo + 2 || u >= edge_hi - 2) p.untrusted_window = true;
    }
    return p;
}

std::vector<double> bridge_project(const std::vector<double>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("bridge_project: need at least two grid points");
    const double fa = values.front(), fb = values.back();
    const double m = static_cast<double>(values.size() - 1);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double s = static_cast<double>(i) / m;
        out[i] = values[i] - ((1.0 - s) * fa + s * fb);
    }
    return out;
}

void write_profile_csv(std::ostream& out, const WeightProfile& p, std::uint64_t seed) {
    out << "y,value,kind,n,seed\n";
    const char* kind = p.kind == ProfileKind::narrow_wedge ? "narrow-wedge" : "f-rewarded";
    out.precision(17);
    for (std::size_t j = 0; j < p.y_grid.size(); ++j) {
        out << p.y_grid[j] << "," << p.values[j] << "," << kind << "," << p.n << ","
            << seed << "\n";
    }
}

}  // namespace blpp
