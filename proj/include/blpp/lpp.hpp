#ifndef BLPP_LPP_HPP
#define BLPP_LPP_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "blpp/env.hpp"

namespace blpp {

// Up-right path on the grid: horizontal runs along lines start_line..end_line
// joined by unit vertical steps. jumps[m] is the column where the path moves
// onto line start_line + 1 + m; with z_i = start_col and z_{j+1} = end_col the
// horizontal segments tile [start_col, end_col].
struct Staircase {
    std::int64_t start_col = 0;
    int start_line = 0;
    std::int64_t end_col = 0;
    int end_line = 0;
    std::vector<std::int64_t> jumps;

    // horizontal segment [lo, hi] occupied on `line`
    std::pair<std::int64_t, std::int64_t> segment(int line) const;
    bool operator==(const Staircase&) const = default;
};

std::string staircase_to_json(const Staircase& s);

double staircase_energy(const BrownianField& field, const Staircase& s);

// Two staircases share a horizontal edge iff on some line their horizontal
// segments overlap in more than one grid point.
bool horizontally_separate(const Staircase& a, const Staircase& b);

// Last passage values from one start (a fixed column, or a free start with
// per-column rewards on the start line) to every column of a target line.
// Recursion: V_i[.] = B(i,.) - B(i,start); V_{k+1}[y] = B(k+1,y) +
// prefixmax_{w<=y}(V_k[w] - B(k+1,w)), leftmost argmax. Cost O(lines * cols).
class LastPassageProfile {
  public:
    static LastPassageProfile from_point(const BrownianField& field,
                                         std::int64_t start_col, int start_line,
                                         int end_line, std::int64_t col_cap = -1,
                                         bool keep_backpointers = true);

    // rewarded_cols: (column, reward) pairs, reward != -inf; the DP maximizes
    // energy + reward over admissible starts.
    static LastPassageProfile from_rewards(
        const BrownianField& field,
        const std::vector<std::pair<std::int64_t, double>>& rewarded_cols,
        int start_line, int end_line, std::int64_t col_cap = -1,
        bool keep_backpointers = true);

    double value_at(std::int64_t end_col) const;
    bool defined_at(std::int64_t end_col) const;

    // Geodesic reconstruction by backpointer walk; leftmost tie rule makes it
    // deterministic. For reward mode the achieved start column is recovered.
    Staircase backtrack(std::int64_t end_col) const;
    std::int64_t start_of(std::int64_t end_col) const;

    int start_line() const { return start_line_; }
    int end_line() const { return end_line_; }
    std::int64_t col_begin() const { return col_begin_; }
    std::int64_t col_end() const { return col_end_; }
    std::int64_t tie_count() const { return tie_count_; }

  private:
    LastPassageProfile() = default;
    void run(const BrownianField& field, const std::vector<double>& init,
             bool keep_backpointers);

    int start_line_ = 0, end_line_ = 0;
    std::int64_t col_begin_ = 0, col_end_ = 0;  // inclusive evaluated range
    bool reward_mode_ = false;
    std::int64_t tie_count_ = 0;
    std::vector<double> values_;                   // at end_line
    std::vector<std::vector<std::int32_t>> back_;  // per line, offset of argmax
    std::vector<std::int32_t> start_back_;         // reward mode: achieved start
    const BrownianField* field_ = nullptr;
};

double last_passage_value(const BrownianField& field, std::int64_t start_col,
                          int start_line, std::int64_t end_col, int end_line);

Staircase geodesic(const BrownianField& field, std::int64_t start_col,
                   int start_line, std::int64_t end_col, int end_line);

// Same geodesic without stored backpointers; O(lines^2 * cols) recompute walk
// for memory-constrained runs.
Staircase geodesic_low_memory(const BrownianField& field, std::int64_t start_col,
                              int start_line, std::int64_t end_col, int end_line);

// Exhaustive enumeration oracle. Returns the exact maximum and every
// maximizing staircase; refuses instances above the enumeration guard.
struct BruteForceResult {
    double value = 0.0;
    std::vector<Staircase> maximizers;
    std::uint64_t enumerated = 0;
};
BruteForceResult brute_force_last_passage(const BrownianField& field,
                                          std::int64_t start_col, int start_line,
                                          std::int64_t end_col, int end_line,
                                          std::uint64_t max_enumeration = 10'000'000);

// Greedy left-to-right disjoint family over endpoint column sets: starts on
// start_line, ends on end_line. Candidate pairs are ordered lexicographically
// (start, end); each step binary-searches the smallest pair whose geodesic is
// horizontally separate from the family's rightmost member.
struct DisjointFamily {
    std::vector<Staircase> members;
    int count() const { return static_cast<int>(members.size()); }
};
DisjointFamily max_disjoint_staircases(const BrownianField& field,
                                       const std::vector<std::int64_t>& start_cols,
                                       int start_line,
                                       const std::vector<std::int64_t>& end_cols,
                                       int end_line);

// Exact small-instance oracle: the largest ell <= ell_max admitting ell
// individually-maximal staircases with endpoints in the given sets that are
// pairwise horizontally separate.
int brute_force_max_disjoint(const BrownianField& field,
                             const std::vector<std::int64_t>& start_cols,
                             int start_line,
                             const std::vector<std::int64_t>& end_cols,
                             int end_line, int ell_max,
                             std::uint64_t max_enumeration = 10'000'000);

}  // namespace blpp

#endif
