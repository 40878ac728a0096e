#include "blpp/lpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace blpp {

std::pair<std::int64_t, std::int64_t> Staircase::segment(int line) const {
    if (line < start_line || line > end_line)
        throw std::invalid_argument("segment: line outside staircase");
    const std::int64_t lo = (line == start_line) ? start_col : jumps[static_cast<std::size_t>(line - start_line - 1)];
    const std::int64_t hi = (line == end_line) ? end_col : jumps[static_cast<std::size_t>(line - start_line)];
    return {lo, hi};
}

std::string staircase_to_json(const Staircase& s) {
    std::ostringstream os;
    os << "{\"start\":[" << s.start_col << "," << s.start_line << "],\"end\":["
       << s.end_col << "," << s.end_line << "],\"jumps\":[";
    for (std::size_t i = 0; i < s.jumps.size(); ++i) {
        if (i) os << ",";
        os << s.jumps[i];
    }
    os << "]}";
    return os.str();
}

double staircase_energy(const BrownianField& field, const Staircase& s) {
    double e = 0.0;
    for (int k = s.start_line; k <= s.end_line; ++k) {
        auto [lo, hi] = s.segment(k);
        e += field.value(k, hi) - field.value(k, lo);
    }
    return e;
}

bool horizontally_separate(const Staircase& a, const Staircase& b) {
    const int lo = std::max(a.start_line, b.start_line);
    const int hi = std::min(a.end_line, b.end_line);
    for (int k = lo; k <= hi; ++k) {
        auto [a1, a2] = a.segment(k);
        auto [b1, b2] = b.segment(k);
        if (std::max(a1, b1) < std::min(a2, b2)) return false;
    }
    return true;
}

// ---- DP ---------------------------------------------------------------

namespace {
constexpr double kUndefined = -std::numeric_limits<double>::infinity();
}

LastPassageProfile LastPassageProfile::from_point(const BrownianField& field,
                                                  std::int64_t start_col,
                                                  int start_line, int end_line,
                                                  std::int64_t col_cap,
                                                  bool keep_backpointers) {
    if (end_line < start_line || start_line < 0 || end_line >= field.num_lines())
        throw std::invalid_argument("last_passage_profile: bad line range");
    if (start_col < 0 || start_col >= field.grid().num_points)
        throw std::invalid_argument("last_passage_profile: start column outside grid");
    LastPassageProfile p;
    p.field_ = &field;
    p.start_line_ = start_line;
    p.end_line_ = end_line;
    p.col_begin_ = start_col;
    p.col_end_ = (col_cap < 0) ? field.grid().num_points - 1
                               : std::min<std::int64_t>(col_cap, field.grid().num_points - 1);
    if (p.col_end_ < p.col_begin_)
        throw std::invalid_argument("last_passage_profile: empty column range");

    const std::int64_t count = p.col_end_ - p.col_begin_ + 1;
    std::vector<double> init(static_cast<std::size_t>(count), kUndefined);
    const double anchor = field.value(start_line, start_col);
    const std::int64_t lo = std::max(p.col_begin_, field.first_col(start_line));
    const std::int64_t hi = std::min(p.col_end_, field.last_col(start_line));
    if (start_col < lo || start_col > hi)
        throw out_of_band_error("last_passage_profile: start outside stored band");
    for (std::int64_t c = start_col; c <= hi; ++c)
        init[static_cast<std::size_t>(c - p.col_begin_)] = field.value(start_line, c) - anchor;
    p.run(field, init, keep_backpointers);
    return p;
}

LastPassageProfile LastPassageProfile::from_rewards(
    const BrownianField& field,
    const std::vector<std::pair<std::int64_t, double>>& rewarded_cols,
    int start_line, int end_line, std::int64_t col_cap, bool keep_backpointers) {
    if (end_line < start_line || start_line < 0 || end_line >= field.num_lines())
        throw std::invalid_argument("last_passage_profile: bad line range");
    if (rewarded_cols.empty())
        throw no_admissible_start_error("no finite rewards on the start line");
    LastPassageProfile p;
    p.field_ = &field;
    p.start_line_ = start_line;
    p.end_line_ = end_line;
    p.reward_mode_ = true;
    std::int64_t min_col = rewarded_cols.front().first;
    for (const auto& [c, g] : rewarded_cols) min_col = std::min(min_col, c);
    p.col_begin_ = std::max(min_col, field.first_col(start_line));
    p.col_end_ = (col_cap < 0) ? field.grid().num_points - 1
                               : std::min<std::int64_t>(col_cap, field.grid().num_points - 1);
    if (p.col_end_ < p.col_begin_)
        throw std::invalid_argument("last_passage_profile: empty column range");

    const std::int64_t count = p.col_end_ - p.col_begin_ + 1;
    // reward at column, dense over the evaluated range
    std::vector<double> reward(static_cast<std::size_t>(count), kUndefined);
    bool any = false;
    for (const auto& [c, g] : rewarded_cols) {
        if (c < p.col_begin_ || c > p.col_end_) continue;
        if (c < field.first_col(start_line) || c > field.last_col(start_line)) continue;
        auto& slot = reward[static_cast<std::size_t>(c - p.col_begin_)];
        slot = std::max(slot, g);
        any = true;
    }
    if (!any) throw no_admissible_start_error("no admissible start inside the window");

    // V_0[z] = B(0,z) + prefixmax_{u<=z}(g(u) - B(0,u)); leftmost argmax.
    std::vector<double> init(static_cast<std::size_t>(count), kUndefined);
    p.start_back_.assign(static_cast<std::size_t>(count), -1);
    const std::int64_t lo = std::max(p.col_begin_, field.first_col(start_line));
    const std::int64_t hi = std::min(p.col_end_, field.last_col(start_line));
    double best = kUndefined;
    std::int64_t best_u = -1;
    for (std::int64_t z = lo; z <= hi; ++z) {
        const double bz = field.value(start_line, z);
        const double g = reward[static_cast<std::size_t>(z - p.col_begin_)];
        if (!is_minus_inf(g)) {
            const double cand = g - bz;
            if (best_u < 0 || cand > best) {
                best = cand;
                best_u = z;
            } else if (cand == best) {
                ++p.tie_count_;
            }
        }
        if (best_u >= 0) {
            init[static_cast<std::size_t>(z - p.col_begin_)] = bz + best;
            p.start_back_[static_cast<std::size_t>(z - p.col_begin_)] =
                static_cast<std::int32_t>(best_u - p.col_begin_);
        }
    }
    p.run(field, init, keep_backpointers);
    return p;
}

void LastPassageProfile::run(const BrownianField& field, const std::vector<double>& init,
                             bool keep_backpointers) {
    const std::int64_t count = col_end_ - col_begin_ + 1;
    std::vector<double> prev = init;
    std::vector<double> cur(static_cast<std::size_t>(count));
    if (keep_backpointers)
        back_.resize(static_cast<std::size_t>(end_line_ - start_line_));
    for (int k = start_line_ + 1; k <= end_line_; ++k) {
        std::fill(cur.begin(), cur.end(), kUndefined);
        std::vector<std::int32_t>* bp = nullptr;
        if (keep_backpointers) {
            auto& row = back_[static_cast<std::size_t>(k - start_line_ - 1)];
            row.assign(static_cast<std::size_t>(count), -1);
            bp = &row;
        }
        const std::int64_t lo = std::max(col_begin_, std::max(field.first_col(k), field.first_col(k - 1)));
        const std::int64_t hi = std::min(col_end_, field.last_col(k));
        const std::int64_t prev_hi = std::min(col_end_, field.last_col(k - 1));
        double best = kUndefined;
        std::int64_t best_w = -1;
        for (std::int64_t z = lo; z <= hi; ++z) {
            const double bz = field.value(k, z);
            if (z <= prev_hi) {
                const double pv = prev[static_cast<std::size_t>(z - col_begin_)];
                if (!is_minus_inf(pv)) {
                    const double cand = pv - bz;
                    if (best_w < 0 || cand > best) {
                        best = cand;
                        best_w = z;
                    } else if (cand == best) {
                        ++tie_count_;
                    }
                }
            }
            if (best_w >= 0) {
                cur[static_cast<std::size_t>(z - col_begin_)] = bz + best;
                if (bp) (*bp)[static_cast<std::size_t>(z - col_begin_)] =
                    static_cast<std::int32_t>(best_w - col_begin_);
            }
        }
        std::swap(prev, cur);
    }
    values_ = std::move(prev);
}

bool LastPassageProfile::defined_at(std::int64_t end_col) const {
    if (end_col < col_begin_ || end_col > col_end_) return false;
    return !is_minus_inf(values_[static_cast<std::size_t>(end_col - col_begin_)]);
}

double LastPassageProfile::value_at(std::int64_t end_col) const {
    if (end_col < col_begin_ || end_col > col_end_)
        throw no_zigzag_error("no staircase reaches column " + std::to_string(end_col));
    const double v = values_[static_cast<std::size_t>(end_col - col_begin_)];
    if (is_minus_inf(v))
        throw no_zigzag_error("no staircase reaches column " + std::to_string(end_col));
    return v;
}

Staircase LastPassageProfile::backtrack(std::int64_t end_col) const {
    if (!defined_at(end_col))
        throw no_zigzag_error("backtrack: column not reached");
    if (back_.size() != static_cast<std::size_t>(end_line_ - start_line_))
        throw std::logic_error("backtrack: backpointers were not kept");
    Staircase s;
    s.end_col = end_col;
    s.end_line = end_line_;
    s.start_line = start_line_;
    s.jumps.resize(static_cast<std::size_t>(end_line_ - start_line_));
    std::int64_t cur = end_col;
    for (int k = end_line_; k > start_line_; --k) {
        const auto off = back_[static_cast<std::size_t>(k - start_line_ - 1)]
                              [static_cast<std::size_t>(cur - col_begin_)];
        cur = col_begin_ + off;
        s.jumps[static_cast<std::size_t>(k - start_line_ - 1)] = cur;
    }
    s.start_col = reward_mode_
                      ? col_begin_ + start_back_[static_cast<std::size_t>(cur - col_begin_)]
                      : col_begin_;
    return s;
}

std::int64_t LastPassageProfile::start_of(std::int64_t end_col) const {
    return backtrack(end_col).start_col;
}

double last_passage_value(const BrownianField& field, std::int64_t start_col,
                          int start_line, std::int64_t end_col, int end_line) {
    if (end_col < start_col)
        throw no_zigzag_error("last_passage_value: end column left of start");
    auto p = LastPassageProfile::from_point(field, start_col, start_line, end_line,
                                            end_col, /*keep_backpointers=*/false);
    return p.value_at(end_col);
}

Staircase geodesic(const BrownianField& field, std::int64_t start_col,
                   int start_line, std::int64_t end_col, int end_line) {
    if (end_col < start_col)
        throw no_zigzag_error("geodesic: end column left of start");
    auto p = LastPassageProfile::from_point(field, start_col, start_line, end_line, end_col);
    return p.backtrack(end_col);
}

Staircase geodesic_low_memory(const BrownianField& field, std::int64_t start_col,
                              int start_line, std::int64_t end_col, int end_line) {
    if (end_col < start_col)
        throw no_zigzag_error("geodesic: end column left of start");
    Staircase s;
    s.start_col = start_col;
    s.start_line = start_line;
    s.end_col = end_col;
    s.end_line = end_line;
    s.jumps.resize(static_cast<std::size_t>(end_line - start_line));
    std::int64_t cur = end_col;
    // per line, recompute the profile up to the line below and take the
    // leftmost argmax of V_{k-1}[w] - B(k, w) over w <= cur
    for (int k = end_line; k > start_line; --k) {
        auto p = LastPassageProfile::from_point(field, start_col, start_line, k - 1,
                                                cur, /*keep_backpointers=*/false);
        double best = 0.0;
        std::int64_t best_w = -1;
        const std::int64_t lo = std::max(start_col, std::max(field.first_col(k - 1), field.first_col(k)));
        const std::int64_t hi = std::min({cur, field.last_col(k - 1), field.last_col(k)});
        for (std::int64_t w = lo; w <= hi; ++w) {
            if (!p.defined_at(w)) continue;
            const double cand = p.value_at(w) - field.value(k, w);
            if (best_w < 0 || cand > best) {
                best = cand;
                best_w = w;
            }
        }
        if (best_w < 0) throw no_zigzag_error("geodesic_low_memory: disconnected band");
        cur = best_w;
        s.jumps[static_cast<std::size_t>(k - start_line - 1)] = cur;
    }
    return s;
}

// ---- enumeration oracle -------------------------------------------------

namespace {

std::uint64_t binomial_guarded(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        if (r > cap) return cap + 1;
        r = r * (n - k + i) / i;
    }
    return r;
}

void enumerate_jumps(const BrownianField& field, Staircase& s, std::size_t depth,
                     std::int64_t min_col, BruteForceResult& out) {
    if (depth == s.jumps.size()) {
        ++out.enumerated;
        const double e = staircase_energy(field, s);
        if (out.maximizers.empty() || e > out.value) {
            out.value = e;
            out.maximizers.assign(1, s);
        } else if (e == out.value) {
            out.maximizers.push_back(s);
        }
        return;
    }
    for (std::int64_t c = min_col; c <= s.end_col; ++c) {
        s.jumps[depth] = c;
        enumerate_jumps(field, s, depth + 1, c, out);
    }
}

}  // namespace

BruteForceResult brute_force_last_passage(const BrownianField& field,
                                          std::int64_t start_col, int start_line,
                                          std::int64_t end_col, int end_line,
                                          std::uint64_t max_enumeration) {
    if (end_col < start_col || end_line < start_line)
        throw no_zigzag_error("brute_force_last_passage: empty staircase set");
    const std::uint64_t m = static_cast<std::uint64_t>(end_col - start_col + 1);
    const std::uint64_t steps = static_cast<std::uint64_t>(end_line - start_line);
    const std::uint64_t total = binomial_guarded(m + steps - 1, steps, max_enumeration);
    if (total > max_enumeration)
        throw enumeration_too_large_error("instance too large to enumerate");
    BruteForceResult out;
    Staircase s;
    s.start_col = start_col;
    s.start_line = start_line;
    s.end_col = end_col;
    s.end_line = end_line;
    s.jumps.resize(steps);
    enumerate_jumps(field, s, 0, start_col, out);
    return out;
}

// ---- disjoint families ----------------------------------------------------

namespace {

class SweepCache {
  public:
    SweepCache(const BrownianField& field, int start_line, int end_line,
               std::int64_t col_cap)
        : field_(field), start_line_(start_line), end_line_(end_line), cap_(col_cap) {}

    const LastPassageProfile& sweep(std::int64_t start_col) {
        auto it = sweeps_.find(start_col);
        if (it == sweeps_.end()) {
            it = sweeps_
                     .emplace(start_col,
                              LastPassageProfile::from_point(field_, start_col, start_line_,
                                                             end_line_, cap_))
                     .first;
        }
        return it->second;
    }

    const Staircase& path(std::int64_t start_col, std::int64_t end_col) {
        auto key = std::make_pair(start_col, end_col);
        auto it = paths_.find(key);
        if (it == paths_.end())
            it = paths_.emplace(key, sweep(start_col).backtrack(end_col)).first;
        return it->second;
    }

  private:
    const BrownianField& field_;
    int start_line_, end_line_;
    std::int64_t cap_;
    std::map<std::int64_t, LastPassageProfile> sweeps_;
    std::map<std::pair<std::int64_t, std::int64_t>, Staircase> paths_;
};

}  // namespace

DisjointFamily max_disjoint_staircases(const BrownianField& field,
                                       const std::vector<std::int64_t>& start_cols,
                                       int start_line,
                                       const std::vector<std::int64_t>& end_cols,
                                       int end_line) {
    if (start_cols.empty() || end_cols.empty())
        throw std::invalid_argument("max_disjoint_staircases: empty endpoint set");
    std::vector<std::int64_t> xs = start_cols, ys = end_cols;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    SweepCache cache(field, start_line, end_line, ys.back());
    DisjointFamily family;

    auto first_admissible_y = [&](std::int64_t x) -> std::size_t {
        return static_cast<std::size_t>(
            std::lower_bound(ys.begin(), ys.end(), x) - ys.begin());
    };

    // leftmost admissible endpoint pair overall
    std::size_t xi0 = 0;
    while (xi0 < xs.size() && first_admissible_y(xs[xi0]) == ys.size()) ++xi0;
    if (xi0 == xs.size()) return family;
    family.members.push_back(cache.path(xs[xi0], ys[first_admissible_y(xs[xi0])]));

    auto admissible = [&](const Staircase& cand) {
        for (const Staircase& m : family.members)
            if (cand == m || !horizontally_separate(cand, m)) return false;
        return true;
    };

    while (true) {
        bool found = false;
        for (std::size_t xi = 0; xi < xs.size() && !found; ++xi) {
            const std::int64_t x = xs[xi];
            std::size_t lo = first_admissible_y(x);
            if (lo == ys.size()) continue;
            std::size_t hi = ys.size() - 1;
            if (!admissible(cache.path(x, ys[hi]))) continue;
            // smallest y with a separate geodesic; separateness is monotone
            // in the end column for a fixed start (sandwich ordering)
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (admissible(cache.path(x, ys[mid])))
                    hi = mid;
                else
                    lo = mid + 1;
            }
            // guard against degenerate non-monotone ties
            while (lo < ys.size() && !admissible(cache.path(x, ys[lo]))) ++lo;
            if (lo == ys.size()) continue;
            family.members.push_back(cache.path(x, ys[lo]));
            found = true;
        }
        if (!found) break;
    }
    return family;
}

namespace {

bool extend_disjoint(const BrownianField& field,
                     const std::vector<std::vector<Staircase>>& maximizers,
                     std::vector<const Staircase*>& chosen, std::size_t from_pair,
                     int remaining) {
    if (remaining == 0) return true;
    for (std::size_t i = from_pair; i < maximizers.size(); ++i) {
        for (const Staircase& cand : maximizers[i]) {
            bool ok = true;
            for (const Staircase* c : chosen) {
                if (*c == cand || !horizontally_separate(*c, cand)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            chosen.push_back(&cand);
            if (extend_disjoint(field, maximizers, chosen, i, remaining - 1)) return true;
            chosen.pop_back();
        }
    }
    return false;
}

}  // namespace

int brute_force_max_disjoint(const BrownianField& field,
                             const std::vector<std::int64_t>& start_cols,
                             int start_line,
                             const std::vector<std::int64_t>& end_cols,
                             int end_line, int ell_max,
                             std::uint64_t max_enumeration) {
    if (ell_max < 1) throw std::invalid_argument("brute_force_max_disjoint: ell_max >= 1");
    std::vector<std::vector<Staircase>> maximizers;
    for (std::int64_t x : start_cols) {
        for (std::int64_t y : end_cols) {
            if (y < x) continue;
            auto r = brute_force_last_passage(field, x, start_line, y, end_line,
                                              max_enumeration);
            maximizers.push_back(std::move(r.maximizers));
        }
    }
    if (maximizers.empty()) return 0;
    int best = 0;
    for (int ell = ell_max; ell >= 1; --ell) {
        std::vector<const Staircase*> chosen;
        if (extend_disjoint(field, maximizers, chosen, 0, ell)) {
            best = ell;
            break;
        }
    }
    return best;
}

}  // namespace blpp
