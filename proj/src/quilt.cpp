#include "blpp/quilt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blpp {

namespace {

int grid_index_of(const std::vector<double>& y_grid, double v) {
    const auto it = std::lower_bound(y_grid.begin(), y_grid.end(), v - 1e-9);
    if (it == y_grid.end() || std::abs(*it - v) > 1e-9)
        throw std::invalid_argument("stitch point off the y grid");
    return static_cast<int>(it - y_grid.begin());
}

}  // namespace

SewnQuilt sew_quilt(const std::vector<std::vector<double>>& fabrics,
                    const std::vector<double>& stitch_points,
                    const std::vector<double>& y_grid) {
    if (y_grid.size() < 2) throw std::invalid_argument("sew_quilt: degenerate grid");
    if (fabrics.size() < stitch_points.size() + 1)
        throw std::invalid_argument("sew_quilt: need #stitches + 1 fabrics");
    for (const auto& f : fabrics)
        if (f.size() != y_grid.size())
            throw grid_mismatch_error("sew_quilt: fabric length off the y grid");
    for (std::size_t i = 1; i < stitch_points.size(); ++i)
        if (!(stitch_points[i - 1] < stitch_points[i]))
            throw std::invalid_argument("sew_quilt: stitch points must increase");

    const std::size_t patches = stitch_points.size() + 1;
    SewnQuilt out;
    out.shifts.assign(patches, 0.0);
    out.patch_ranges.resize(patches);
    std::vector<int> cut(patches + 1);
    cut[0] = 0;
    for (std::size_t i = 0; i < stitch_points.size(); ++i)
        cut[i + 1] = grid_index_of(y_grid, stitch_points[i]);
    cut[patches] = static_cast<int>(y_grid.size()) - 1;
    for (std::size_t i = 0; i + 1 <= patches; ++i) {
        if (cut[i] > cut[i + 1])
            throw std::invalid_argument("sew_quilt: stitch outside [a, b]");
        out.patch_ranges[i] = {cut[i], cut[i + 1]};
    }

    for (std::size_t i = 1; i < patches; ++i) {
        const int s = cut[i];  // stitch grid index: left and right values agree
        out.shifts[i] = fabrics[i - 1][static_cast<std::size_t>(s)] + out.shifts[i - 1] -
                        fabrics[i][static_cast<std::size_t>(s)];
    }

    out.values.resize(y_grid.size());
    for (std::size_t i = 0; i < patches; ++i) {
        for (int j = cut[i]; j <= cut[i + 1]; ++j)
            out.values[static_cast<std::size_t>(j)] =
                fabrics[i][static_cast<std::size_t>(j)] + out.shifts[i];
    }
    return out;
}

std::pair<std::optional<QuiltSpec>, QuiltReport> decompose_profile(
    const BrownianField& field, int n, const InitialCondition& f, double D,
    double chi, int j_max, const std::vector<double>& y_grid) {
    PolymerForest forest(field, n, f, y_grid);
    return decompose_profile(forest, D, chi, j_max);
}

std::pair<std::optional<QuiltSpec>, QuiltReport> decompose_profile(
    PolymerForest& forest, double D, double chi, int j_max) {
    QuiltReport report;
    const WeightProfile& profile = forest.profile();
    double peak = 0.0;
    for (double v : profile.values) peak = std::max(peak, std::abs(v));
    report.profile_scale = std::max(1.0, peak);
    report.untrusted = profile.untrusted_window;

    const DyadicSearchResult search = forest.dyadic_scale_search(D, chi, j_max);
    report.clamped = search.last_report.clamped;
    report.untrusted = report.untrusted || search.last_report.untrusted;
    if (search.error_flag) {
        report.error_flag = true;
        return {std::nullopt, report};
    }
    report.gamma = search.gamma;
    report.j = search.j;

    CanopyDecomposition decomp = forest.canopy_decomposition_at_line(search.level_line);
    report.canopy_count = decomp.canopy_count();
    std::vector<SplitPiece> pieces;
    for (const Canopy& c : decomp.canopies) {
        SpecialSplit split = forest.special_point_and_split(c, search.eps);
        for (const SplitPiece& p : split.pieces) pieces.push_back(p);
    }
    decomp.split_pieces = pieces;

    QuiltSpec quilt;
    quilt.a = forest.y_grid().front();
    quilt.b = forest.y_grid().back();
    quilt.y_grid = forest.y_grid();
    quilt.gamma = search.gamma;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i + 1 < pieces.size()) quilt.stitch_points.push_back(pieces[i].hi);
        quilt.rni.push_back(pieces[i].rni);
        quilt.fabrics.push_back(
            narrow_wedge_profile(forest.field(), forest.n(), pieces[i].reroot_x,
                                 forest.y_grid())
                .values);
    }

    SewnQuilt sewn = sew_quilt(quilt.fabrics, quilt.stitch_points, quilt.y_grid);
    quilt.shifts = sewn.shifts;
    quilt.patch_ranges = sewn.patch_ranges;

    report.stitch_count = static_cast<int>(quilt.stitch_points.size());
    report.per_patch_deviation.resize(pieces.size(), 0.0);
    report.per_patch_residual.resize(pieces.size(), 0.0);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        // chained-shift deviation across the sewn patch range
        double dev = 0.0;
        for (int j = quilt.patch_ranges[i].first; j <= quilt.patch_ranges[i].second; ++j)
            dev = std::max(dev, std::abs(profile.values[static_cast<std::size_t>(j)] -
                                         sewn.values[static_cast<std::size_t>(j)]));
        report.per_patch_deviation[i] = dev;
        // constancy residual over the piece's own members
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (int j = pieces[i].first_idx; j <= pieces[i].last_idx; ++j) {
            const double d = profile.values[static_cast<std::size_t>(j)] -
                             quilt.fabrics[i][static_cast<std::size_t>(j)];
            if (first) {
                lo = hi = d;
                first = false;
            } else {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        report.per_patch_residual[i] = hi - lo;
        report.max_deviation = std::max(report.max_deviation, report.per_patch_deviation[i]);
        report.max_residual = std::max(report.max_residual, report.per_patch_residual[i]);
    }
    report.pass = report.max_residual <= 1e-9 * report.profile_scale;
    return {quilt, report};
}

QuiltReport verify_reconstruction(const WeightProfile& profile, const QuiltSpec& quilt,
                                  double tol) {
    if (profile.y_grid.size() != quilt.y_grid.size())
        throw grid_mismatch_error("verify_reconstruction: grid size mismatch");
    for (std::size_t i = 0; i < quilt.y_grid.size(); ++i)
        if (std::abs(profile.y_grid[i] - quilt.y_grid[i]) > 1e-12)
            throw grid_mismatch_error("verify_reconstruction: grids differ");

    QuiltReport report;
    report.gamma = quilt.gamma;
    report.stitch_count = static_cast<int>(quilt.stitch_points.size());
    double peak = 0.0;
    for (double v : profile.values) peak = std::max(peak, std::abs(v));
    report.profile_scale = std::max(1.0, peak);

    report.per_patch_deviation.resize(quilt.patch_ranges.size(), 0.0);
    report.per_patch_residual.resize(quilt.patch_ranges.size(), 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < quilt.patch_ranges.size(); ++i) {
        double dev = 0.0, lo = 0.0, hi = 0.0;
        bool first = true;
        for (int j = quilt.patch_ranges[i].first; j <= quilt.patch_ranges[i].second; ++j) {
            const double q = quilt.fabrics[i][static_cast<std::size_t>(j)] + quilt.shifts[i];
            const double d = profile.values[static_cast<std::size_t>(j)] - q;
            dev = std::max(dev, std::abs(d));
            if (first) {
                lo = hi = d;
                first = false;
            } else {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        report.per_patch_deviation[i] = dev;
        report.per_patch_residual[i] = hi - lo;
        report.max_deviation = std::max(report.max_deviation, dev);
        report.max_residual = std::max(report.max_residual, hi - lo);
        if (dev > tol) ok = false;
    }
    report.pass = ok;
    return report;
}

std::string quilt_to_json(const QuiltSpec& q, const QuiltReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"error_flag\":" << (r.error_flag ? "true" : "false")
       << ",\"gamma\":" << r.gamma << ",\"j\":" << r.j
       << ",\"stitch_count\":" << r.stitch_count
       << ",\"max_deviation\":" << r.max_deviation
       << ",\"max_residual\":" << r.max_residual
       << ",\"profile_scale\":" << r.profile_scale
       << ",\"clamped\":" << (r.clamped ? "true" : "false")
       << ",\"untrusted\":" << (r.untrusted ? "true" : "false");
    if (!r.error_flag) {
        os << ",\"stitch_points\":[";
        for (std::size_t i = 0; i < q.stitch_points.size(); ++i) {
            if (i) os << ",";
            os << q.stitch_points[i];
        }
        os << "],\"shifts\":[";
        for (std::size_t i = 0; i < q.shifts.size(); ++i) {
            if (i) os << ",";
            os << q.shifts[i];
        }
        os << "],\"rni\":[";
        for (std::size_t i = 0; i < q.rni.size(); ++i) {
            if (i) os << ",";
            os << q.rni[i];
        }
        os << "]";
    }
    os << "}";
    return os.str();
}

void write_patch_csv(std::ostream& out, const QuiltSpec& q, const QuiltReport& r) {
    out << "patch,left,right,rni,deviation,residual\n";
    out.precision(17);
    for (std::size_t i = 0; i < q.patch_ranges.size(); ++i) {
        out << i << "," << q.y_grid[static_cast<std::size_t>(q.patch_ranges[i].first)]
            << "," << q.y_grid[static_cast<std::size_t>(q.patch_ranges[i].second)] << ","
            << q.rni[i] << "," << r.per_patch_deviation[i] << ","
            << r.per_patch_residual[i] << "\n";
    }
}

}  // namespace blpp
