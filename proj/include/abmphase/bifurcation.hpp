#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "abmphase/odenet.hpp"

namespace abmphase::bifurcation {

// Scalar field of one variable at fixed parameter value.
using Field = std::function<double(double nu2, double sigma)>;

// Odd part of the learned right-hand side about a center:
//   g(c + u) = [f(c + u) - f(c - u)] / 2 shifted so g is odd about c.
struct SymmetrizedField {
    Field raw;
    double center = 0.0;

    double operator()(double nu2, double sigma) const {
        return 0.5 * (raw(nu2, sigma) - raw(2.0 * center - nu2, sigma));
    }
};

SymmetrizedField symmetrize(const odenet::EulerNetModel& m, double center);

// Raw whitened-coordinate field of the trained network.
Field raw_field(const odenet::EulerNetModel& m);

// Largest |f(u) + f(-u)| over a probe grid; how far from odd the raw field
// is before symmetrization.
double asymmetry_diagnostic(const Field& f, double sigma, double lo, double hi, int n = 101);

struct RootInfo {
    double nu2 = 0.0;
    bool stable = false;
};

struct RootScan {
    std::vector<RootInfo> roots;
    std::vector<double> tangencies;  // grid zeros without a sign change
};

// Scan grid_n points over [lo, hi], bisect every sign change to
// |g| < tol, and classify stability by the sign of dg/dnu2.
RootScan find_roots(const Field& g, double sigma, double lo, double hi, int grid_n,
                    double tol = 1e-8);

enum class DiagramVariant { raw, symmetrized };

struct SigmaSlice {
    double sigma = 0.0;
    std::vector<RootInfo> roots;
};

struct BranchPoint {
    double sigma = 0.0;
    double nu2 = 0.0;
    bool stable = false;
};

struct Branch {
    std::vector<BranchPoint> points;
};

struct BifurcationDiagram {
    std::vector<SigmaSlice> slices;
    std::vector<Branch> branches;
    std::optional<double> sigma_star;
    DiagramVariant variant = DiagramVariant::symmetrized;
    double nu2_lo = 0.0, nu2_hi = 0.0;
};

// Roots per sigma assembled into branches by nearest continuation
// (threshold 5x the nu2 grid spacing).
BifurcationDiagram build_diagram(const Field& field, const std::vector<double>& sigma_grid,
                                 double nu2_lo, double nu2_hi, int grid_n,
                                 DiagramVariant variant);

// Midpoint between the largest sigma with three roots and the smallest
// sigma with one root; empty when the count never changes.
std::optional<double> detect_critical_sigma(const BifurcationDiagram& d);

}  // namespace abmphase::bifurcation
