#ifndef BLPP_PROFILES_HPP
#define BLPP_PROFILES_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blpp/scaled.hpp"

namespace blpp {

struct PsiTriple {
    double psi1 = 1.0, psi2 = 1.0, psi3 = 1.0;
};

// Initial condition sampled on a uniform scaled grid; kMinusInf marks
// forbidden starting locations.
class InitialCondition {
  public:
    InitialCondition(double x_first, double dx, std::vector<double> values,
                     PsiTriple psi = {});

    static InitialCondition narrow_wedge(double x0);
    static InitialCondition flat(double half_width, double dx = 0.05);
    static InitialCondition slope(double gradient, double half_width, double dx = 0.05);
    static InitialCondition random_brownian(double sigma, std::uint64_t seed,
                                            double half_width, double dx = 0.05);
    static InitialCondition from_csv(std::istream& in, PsiTriple psi = {});

    std::size_t size() const { return values_.size(); }
    double sample_x(std::size_t i) const { return x_first_ + static_cast<double>(i) * dx_; }
    double value(std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    const PsiTriple& psi() const { return psi_; }
    std::string describe() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }

  private:
    double x_first_, dx_;
    std::vector<double> values_;
    PsiTriple psi_;
    std::string label_;
};

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> violations;
};

// Growth bound f(x) <= Psi1 (1 + |x|) on finite samples and non-degeneracy
// sup_{[-Psi2, Psi2]} f > -Psi3.
ValidationReport validate_initial_condition(const InitialCondition& f);

enum class ProfileKind { narrow_wedge, f_rewarded };

struct WeightProfile {
    int n = 0;
    ProfileKind kind = ProfileKind::narrow_wedge;
    double x0 = 0.0;  // narrow-wedge start (effective, snapped)
    std::vector<double> y_grid;
    std::vector<double> values;
    // set when an achieving start lands within 2 grid points of the stored
    // window edge; the truncated sup may then bind
    bool untrusted_window = false;
};

std::vector<double> uniform_grid(double lo, double hi, int count);

// One DP sweep for all y: values[j] = Wgt from (x0, 0) to (y_j, 1).
WeightProfile narrow_wedge_profile(const BrownianField& field, int n, double x0,
                                   const std::vector<double>& y_grid);

// f-rewarded line-to-point profile, one sweep with line-0 rewards
// g(u) = u + 2^{1/2} n^{1/3} f(u_scaled) folded into the initialization.
WeightProfile f_rewarded_profile(const BrownianField& field, int n,
                                 const InitialCondition& f,
                                 const std::vector<double>& y_grid);

// Rewarded columns handed to the DP for an initial condition (column, g).
std::vector<std::pair<std::int64_t, double>> rewarded_columns(
    const GridSpec& grid, int n, const InitialCondition& f);

// Subtract the affine interpolant of the endpoint values; result vanishes at
// both ends. Input values live on a uniform grid over [a, b].
std::vector<double> bridge_project(const std::vector<double>& values);

void write_profile_csv(std::ostream& out, const WeightProfile& p, std::uint64_t seed);

}  // namespace blpp

#endif
