#include "abmphase/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abmphase::bifurcation {

Field raw_field(const odenet::EulerNetModel& m) {
    return [&m](double nu2, double sigma) {
        return odenet::field_whitened(m, nu2, m.param_scaler.apply1(sigma));
    };
}

SymmetrizedField symmetrize(const odenet::EulerNetModel& m, double center) {
    return SymmetrizedField{raw_field(m), center};
}

double asymmetry_diagnostic(const Field& f, double sigma, double lo, double hi, int n) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = lo + (hi - lo) * i / (n - 1);
        worst = std::max(worst, std::abs(f(u, sigma) + f(-u, sigma)));
    }
    return worst;
}

namespace {

double bisect(const Field& g, double sigma, double a, double b, double fa, double tol) {
    // g(a) and g(b) have opposite signs
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = g(mid, sigma);
        if (std::abs(fm) < tol || 0.5 * (b - a) < 1e-15 * (1.0 + std::abs(mid))) return mid;
        if ((fa < 0.0) != (fm < 0.0)) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

bool is_stable(const Field& g, double sigma, double x, double step) {
    return (g(x + step, sigma) - g(x - step, sigma)) / (2.0 * step) < 0.0;
}

}  // namespace

RootScan find_roots(const Field& g, double sigma, double lo, double hi, int grid_n,
                    double tol) {
    if (grid_n < 2 || !(hi > lo)) throw std::invalid_argument("find_roots: bad grid");
    const double dx = (hi - lo) / (grid_n - 1);
    std::vector<double> x(static_cast<std::size_t>(grid_n)), f(static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i) {
        x[static_cast<std::size_t>(i)] = lo + dx * i;
        f[static_cast<std::size_t>(i)] = g(x[static_cast<std::size_t>(i)], sigma);
    }

    RootScan scan;
    const double fd_step = dx * 1e-2;
    auto add_root = [&](double r) {
        for (const auto& existing : scan.roots)
            if (std::abs(existing.nu2 - r) < dx * 1e-3) return;
        scan.roots.push_back({r, is_stable(g, sigma, r, fd_step)});
    };

    for (int i = 0; i < grid_n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (f[ui] == 0.0) {
            // exact grid zero: a root if the sign flips across it,
            // otherwise a tangency
            const double left = i > 0 ? f[ui - 1] : 0.0;
            double right = 0.0;
            int j = i + 1;
            while (j < grid_n && f[static_cast<std::size_t>(j)] == 0.0) ++j;
            if (j < grid_n) right = f[static_cast<std::size_t>(j)];
            if (left != 0.0 && right != 0.0 && (left < 0.0) != (right < 0.0))
                add_root(x[ui]);
            else
                scan.tangencies.push_back(x[ui]);
            continue;
        }
        if (i + 1 < grid_n) {
            const auto uj = ui + 1;
            if (f[uj] != 0.0 && (f[ui] < 0.0) != (f[uj] < 0.0))
                add_root(bisect(g, sigma, x[ui], x[uj], f[ui], tol));
        }
    }
    std::sort(scan.roots.begin(), scan.roots.end(),
              [](const RootInfo& a, const RootInfo& b) { return a.nu2 < b.nu2; });
    return scan;
}

BifurcationDiagram build_diagram(const Field& field, const std::vector<double>& sigma_grid,
                                 double nu2_lo, double nu2_hi, int grid_n,
                                 DiagramVariant variant) {
    if (sigma_grid.empty()) throw std::invalid_argument("build_diagram: empty sigma grid");
    BifurcationDiagram d;
    d.variant = variant;
    d.nu2_lo = nu2_lo;
    d.nu2_hi = nu2_hi;

    for (const double s : sigma_grid) {
        SigmaSlice slice;
        slice.sigma = s;
        slice.roots = find_roots(field, s, nu2_lo, nu2_hi, grid_n).roots;
        d.slices.push_back(std::move(slice));
    }

    // nearest-continuation branch assembly
    const double dx = (nu2_hi - nu2_lo) / (grid_n - 1);
    const double match_tol = 5.0 * dx;
    struct Open {
        Branch branch;
        double last = 0.0;
    };
    std::vector<Open> open;
    for (const auto& slice : d.slices) {
        std::vector<bool> used(slice.roots.size(), false);
        std::vector<bool> extended(open.size(), false);
        // greedy nearest pairs
        for (;;) {
            double best = match_tol;
            int bi = -1, bj = -1;
            for (std::size_t i = 0; i < open.size(); ++i) {
                if (extended[i]) continue;
                for (std::size_t j = 0; j < slice.roots.size(); ++j) {
                    if (used[j]) continue;
                    const double dist = std::abs(open[i].last - slice.roots[j].nu2);
                    if (dist < best) {
                        best = dist;
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                    }
                }
            }
            if (bi < 0) break;
            auto& o = open[static_cast<std::size_t>(bi)];
            const auto& r = slice.roots[static_cast<std::size_t>(bj)];
            o.branch.points.push_back({slice.sigma, r.nu2, r.stable});
            o.last = r.nu2;
            extended[static_cast<std::size_t>(bi)] = true;
            used[static_cast<std::size_t>(bj)] = true;
        }
        // close branches that found no continuation
        for (std::size_t i = open.size(); i-- > 0;) {
            if (!extended[i]) {
                d.branches.push_back(std::move(open[i].branch));
                open.erase(open.begin() + static_cast<long>(i));
                extended.erase(extended.begin() + static_cast<long>(i));
            }
        }
        // unmatched roots start new branches
        for (std::size_t j = 0; j < slice.roots.size(); ++j) {
            if (used[j]) continue;
            Open o;
            o.branch.points.push_back({slice.sigma, slice.roots[j].nu2, slice.roots[j].stable});
            o.last = slice.roots[j].nu2;
            open.push_back(std::move(o));
        }
    }
    for (auto& o : open) d.branches.push_back(std::move(o.branch));

    d.sigma_star = detect_critical_sigma(d);
    return d;
}

std::optional<double> detect_critical_sigma(const BifurcationDiagram& d) {
    std::optional<double> last_three;
    std::optional<double> first_one;
    for (const auto& slice : d.slices) {
        if (slice.roots.size() == 3) {
            if (!last_three || slice.sigma > *last_three) last_three = slice.sigma;
        } else if (slice.roots.size() == 1) {
            if (!first_one || slice.sigma < *first_one) first_one = slice.sigma;
        }
    }
    if (!last_three || !first_one) return std::nullopt;
    return 0.5 * (*last_three + *first_one);
}

}  // namespace abmphase::bifurcation
