#include "blpp/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace blpp {

std::int64_t GridSpec::nearest_index(double pos) const {
    const double raw = (pos - origin) / spacing;
    std::int64_t j = static_cast<std::int64_t>(std::llround(raw));
    if (j < 0) j = 0;
    if (j >= num_points) j = num_points - 1;
    return j;
}

GridSpec build_grid(int n, double scaled_half_window, double points_per_unit,
                    bool banded) {
    if (n < 1) throw std::invalid_argument("build_grid: n must be >= 1");
    if (scaled_half_window <= 0.0)
        throw std::invalid_argument("build_grid: scaled_half_window must be > 0");
    if (points_per_unit <= 0.0)
        throw std::invalid_argument("build_grid: points_per_unit must be > 0");

    const double n23 = pow_2_3(static_cast<double>(n));
    const double left = -2.0 * n23 * scaled_half_window;
    const double right = static_cast<double>(n) + 2.0 * n23 * scaled_half_window;

    GridSpec g;
    g.spacing = 1.0 / points_per_unit;
    g.origin = left;
    // enough points that the last one reaches the right edge
    const double width = right - left;
    std::int64_t m = static_cast<std::int64_t>(std::ceil(width / g.spacing - 1e-9)) + 1;
    if (m < 2) m = 2;
    g.num_points = m;
    g.num_lines = n + 1;
    if (banded) g.band_half_width = 4.0 * n23 * scaled_half_window;
    return g;
}

namespace {

// Stored column range of one line. Full grid unless banded, in which case the
// band covers unscaled positions [k - w, k + w] around line index k.
std::pair<std::int64_t, std::int64_t> line_range(const GridSpec& grid, int line) {
    if (!grid.band_half_width) return {0, grid.num_points - 1};
    const double w = *grid.band_half_width;
    const double lo = static_cast<double>(line) - w;
    const double hi = static_cast<double>(line) + w;
    std::int64_t a = static_cast<std::int64_t>(std::floor((lo - grid.origin) / grid.spacing));
    std::int64_t b = static_cast<std::int64_t>(std::ceil((hi - grid.origin) / grid.spacing));
    a = std::max<std::int64_t>(a, 0);
    b = std::min<std::int64_t>(b, grid.num_points - 1);
    if (a > b) throw std::invalid_argument("banded grid: empty band for a line");
    return {a, b};
}

}  // namespace

BrownianField::BrownianField(GridSpec grid, std::vector<std::vector<double>> values,
                             std::uint64_t seed)
    : grid_(std::move(grid)), seed_(seed), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.num_lines)
        throw std::invalid_argument("BrownianField: one value array per line required");
    first_col_.resize(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) {
        auto [a, b] = line_range(grid_, static_cast<int>(k));
        if (static_cast<std::int64_t>(values_[k].size()) != b - a + 1)
            throw std::invalid_argument("BrownianField: value array length mismatch");
        first_col_[k] = a;
    }
}

BrownianField sample_field(const GridSpec& grid, std::uint64_t seed) {
    if (grid.spacing <= 0 || grid.num_points < 2 || grid.num_lines < 1)
        throw std::invalid_argument("sample_field: invalid grid");
    BrownianField f;
    f.grid_ = grid;
    f.seed_ = seed;
    f.first_col_.resize(grid.num_lines);
    f.values_.resize(grid.num_lines);
    const double sd = std::sqrt(grid.spacing);
    for (int k = 0; k < grid.num_lines; ++k) {
        auto [a, b] = line_range(grid, k);
        f.first_col_[k] = a;
        auto& line = f.values_[k];
        line.resize(static_cast<std::size_t>(b - a + 1));
        // anchored at the leftmost stored column; increment j -> j+1 is keyed
        // by the global column index so banded and full storage agree
        line[0] = 0.0;
        double acc = 0.0;
        for (std::int64_t j = a; j < b; ++j) {
            acc += sd * counter_gaussian(seed, static_cast<std::uint64_t>(k),
                                         static_cast<std::uint64_t>(j));
            line[static_cast<std::size_t>(j - a + 1)] = acc;
        }
    }
    return f;
}

// ---- binary dump format ---------------------------------------------------
// magic "BLPPFLD1", then little-endian: u32 version, f64 origin, f64 spacing,
// i64 num_points, i32 num_lines, u8 banded, f64 band_half_width (0 if absent),
// u64 seed; per line: i64 first_col, i64 count, count f64 values.

namespace {

constexpr char kMagic[8] = {'B', 'L', 'P', 'P', 'F', 'L', 'D', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("field restore: truncated stream");
    return v;
}

}  // namespace

void dump_field(const BrownianField& field, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, 1);
    const GridSpec& g = field.grid();
    put<double>(out, g.origin);
    put<double>(out, g.spacing);
    put<std::int64_t>(out, g.num_points);
    put<std::int32_t>(out, g.num_lines);
    put<std::uint8_t>(out, g.band_half_width ? 1 : 0);
    put<double>(out, g.band_half_width.value_or(0.0));
    put<std::uint64_t>(out, field.seed());
    for (int k = 0; k < g.num_lines; ++k) {
        const auto& line = field.line_values(k);
        put<std::int64_t>(out, field.first_col(k));
        put<std::int64_t>(out, static_cast<std::int64_t>(line.size()));
        out.write(reinterpret_cast<const char*>(line.data()),
                  static_cast<std::streamsize>(line.size() * sizeof(double)));
    }
}

BrownianField restore_field(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("field restore: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != 1) throw std::runtime_error("field restore: unsupported version");
    GridSpec g;
    g.origin = get<double>(in);
    g.spacing = get<double>(in);
    g.num_points = get<std::int64_t>(in);
    g.num_lines = get<std::int32_t>(in);
    const bool banded = get<std::uint8_t>(in) != 0;
    const double w = get<double>(in);
    if (banded) g.band_half_width = w;
    const auto seed = get<std::uint64_t>(in);
    std::vector<std::vector<double>> values(static_cast<std::size_t>(g.num_lines));
    for (int k = 0; k < g.num_lines; ++k) {
        (void)get<std::int64_t>(in);  // first_col, re-derived from the grid
        const auto count = get<std::int64_t>(in);
        auto& line = values[static_cast<std::size_t>(k)];
        line.resize(static_cast<std::size_t>(count));
        in.read(reinterpret_cast<char*>(line.data()),
                static_cast<std::streamsize>(line.size() * sizeof(double)));
        if (!in) throw std::runtime_error("field restore: truncated line data");
    }
    return BrownianField(g, std::move(values), seed);
}

void dump_field_file(const BrownianField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    dump_field(field, out);
}

BrownianField restore_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return restore_field(in);
}

}  // namespace blpp
