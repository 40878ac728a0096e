#ifndef BLPP_ENV_HPP
#define BLPP_ENV_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blpp/common.hpp"

namespace blpp {

// Uniform spatial grid shared by all lines of the environment. Positions are
// unscaled coordinates p_j = origin + j * spacing, j in [0, num_points).
struct GridSpec {
    double origin = 0.0;
    double spacing = 1.0;            // > 0
    std::int64_t num_points = 0;     // >= 2
    int num_lines = 0;               // n + 1 lines, indexed 0..n
    std::optional<double> band_half_width;  // banded storage half width

    double position(std::int64_t j) const { return origin + static_cast<double>(j) * spacing; }
    double right_edge() const { return position(num_points - 1); }

    // Nearest grid index to an unscaled position, clamped into the grid.
    std::int64_t nearest_index(double pos) const;
    bool contains(double pos) const { return pos >= origin - 0.5 * spacing && pos <= right_edge() + 0.5 * spacing; }

    bool operator==(const GridSpec&) const = default;
};

// Covers unscaled positions 2 n^{2/3} x at line 0 and n + 2 n^{2/3} y at
// line n for every scaled x, y in [-X, X], at density points_per_unit.
GridSpec build_grid(int n, double scaled_half_window, double points_per_unit,
                    bool banded = false);

// Discretized Brownian environment: one anchored random walk per line with
// Gaussian(0, spacing) increments drawn from a counter-based stream, so a
// (grid, seed) pair fully determines the field.
class BrownianField {
  public:
    BrownianField() = default;
    // Explicit-values constructor, used by tests to build synthetic fields.
    BrownianField(GridSpec grid, std::vector<std::vector<double>> values,
                  std::uint64_t seed = 0);

    const GridSpec& grid() const { return grid_; }
    std::uint64_t seed() const { return seed_; }
    int num_lines() const { return grid_.num_lines; }

    std::int64_t first_col(int line) const { return first_col_[line]; }
    std::int64_t last_col(int line) const {
        return first_col_[line] + static_cast<std::int64_t>(values_[line].size()) - 1;
    }
    bool in_band(int line, std::int64_t col) const {
        return col >= first_col(line) && col <= last_col(line);
    }

    // B(line, p_col); throws out_of_band_error for columns outside storage.
    double value(int line, std::int64_t col) const {
        if (line < 0 || line >= num_lines() || !in_band(line, col))
            throw out_of_band_error("field access outside stored band, line " +
                                    std::to_string(line) + " col " + std::to_string(col));
        return values_[line][static_cast<std::size_t>(col - first_col_[line])];
    }

    const std::vector<double>& line_values(int line) const { return values_[line]; }

    friend BrownianField sample_field(const GridSpec& grid, std::uint64_t seed);

  private:
    GridSpec grid_;
    std::uint64_t seed_ = 0;
    std::vector<std::int64_t> first_col_;
    std::vector<std::vector<double>> values_;
};

BrownianField sample_field(const GridSpec& grid, std::uint64_t seed);

// Binary dump/restore; round-trips bit-exactly (format: docs/field_format.md).
void dump_field(const BrownianField& field, std::ostream& out);
BrownianField restore_field(std::istream& in);
void dump_field_file(const BrownianField& field, const std::string& path);
BrownianField restore_field_file(const std::string& path);

}  // namespace blpp

#endif
