#include "abmphase/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abmphase/rng.hpp"

namespace abmphase::features {

void FeatureMatrix::validate() const {
    if (static_cast<std::size_t>(rows.rows()) != meta.size())
        throw std::invalid_argument("FeatureMatrix: meta length must equal row count");
}

Histogram histogram(const sim::Snapshot& s, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad bin spec");
    Histogram h;
    h.density.assign(static_cast<std::size_t>(bins), 0.0);
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
    h.meta = {s.sigma, s.trajectory_id, s.time};

    for (double x : s.agents) {
        int b = static_cast<int>(std::floor((x - lo) / width));
        if (b < 0) {
            b = 0;
            ++h.clipped;
        } else if (b >= bins) {
            // the closed right edge is not a clip
            if (x > hi) ++h.clipped;
            b = bins - 1;
        }
        h.density[static_cast<std::size_t>(b)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(s.agents.size()) * width);
    for (double& d : h.density) d *= norm;
    return h;
}

MomentVector moments(const sim::Snapshot& s) {
    MomentVector m;
    for (double x : s.agents) {
        const double x2 = x * x;
        m.m1 += x;
        m.m2 += x2;
        m.m3 += x2 * x;
        m.m4 += x2 * x2;
    }
    const double n = static_cast<double>(s.agents.size());
    m.m1 /= n;
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    m.meta = {s.sigma, s.trajectory_id, s.time};
    return m;
}

std::vector<sim::Snapshot> cut_transient(std::span<const sim::Snapshot> traj, double t_cut) {
    std::vector<sim::Snapshot> out;
    out.reserve(traj.size());
    for (const auto& s : traj)
        if (s.time >= t_cut) out.push_back(s);
    if (out.empty())
        throw std::runtime_error("cut_transient: no snapshots remain after t_cut=" +
                                 std::to_string(t_cut));
    return out;
}

FeatureMatrix build_feature_matrix(std::span<const sim::Snapshot> snapshots,
                                   FeatureMode mode, int bins, double lo, double hi) {
    FeatureMatrix fm;
    fm.mode = mode;
    const auto n = static_cast<Eigen::Index>(snapshots.size());
    const Eigen::Index dim = mode == FeatureMode::histograms ? bins : 4;
    fm.rows.resize(n, dim);
    fm.meta.resize(snapshots.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = snapshots[static_cast<std::size_t>(i)];
        if (mode == FeatureMode::histograms) {
            const Histogram h = histogram(s, bins, lo, hi);
            for (Eigen::Index j = 0; j < dim; ++j)
                fm.rows(i, j) = h.density[static_cast<std::size_t>(j)];
            fm.meta[static_cast<std::size_t>(i)] = h.meta;
        } else {
            const MomentVector m = moments(s);
            fm.rows(i, 0) = m.m1;
            fm.rows(i, 1) = m.m2;
            fm.rows(i, 2) = m.m3;
            fm.rows(i, 3) = m.m4;
            fm.meta[static_cast<std::size_t>(i)] = m.meta;
        }
    }
    return fm;
}

namespace {

// One greedy thinning pass at a fixed radius. Kept rows are compared
// block-wise so the inner loop stays in Eigen; aborts early once the kept
// count exceeds the cap (radius too small to be of interest).
std::vector<std::size_t> greedy_pass(const Eigen::MatrixXd& rows,
                                     const std::vector<std::size_t>& order, double radius,
                                     std::size_t cap) {
    const double r2 = radius * radius;
    std::vector<std::size_t> kept;
    kept.reserve(std::min(cap + 1, order.size()));
    Eigen::MatrixXd kept_rows(cap + 1, rows.cols());
    for (const std::size_t i : order) {
        const auto cand = rows.row(static_cast<Eigen::Index>(i));
        bool ok = true;
        const auto nk = static_cast<Eigen::Index>(kept.size());
        constexpr Eigen::Index block = 512;
        for (Eigen::Index start = 0; start < nk && ok; start += block) {
            const Eigen::Index len = std::min(block, nk - start);
            const double dmin = (kept_rows.middleRows(start, len).rowwise() - cand)
                                    .rowwise()
                                    .squaredNorm()
                                    .minCoeff();
            if (dmin <= r2) ok = false;
        }
        if (ok) {
            kept_rows.row(static_cast<Eigen::Index>(kept.size())) = cand;
            kept.push_back(i);
            if (kept.size() > cap) break;
        }
    }
    return kept;
}

}  // namespace

std::vector<std::size_t> subsample(const FeatureMatrix& fm, std::size_t target,
                                   std::uint64_t seed) {
    fm.validate();
    const std::size_t n = fm.size();
    if (target > n) throw std::invalid_argument("subsample: target exceeds row count");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng(seed, 0x5b5eca11u);
    shuffle(order, rng);

    if (target == n) return order;

    const std::size_t tol = std::max<std::size_t>(1, target / 20);
    const std::size_t cap = target + tol;

    // Bracket the radius: 0 keeps everything (duplicates aside), the
    // diameter keeps one row.
    double lo = 0.0;
    double hi = 0.0;
    {
        const Eigen::RowVectorXd mins = fm.rows.colwise().minCoeff();
        const Eigen::RowVectorXd maxs = fm.rows.colwise().maxCoeff();
        hi = (maxs - mins).norm() + 1e-30;
    }

    std::vector<std::size_t> best;
    for (int iter = 0; iter < 48; ++iter) {
        const double mid = 0.5 * (lo + hi);
        auto kept = greedy_pass(fm.rows, order, mid, cap);
        if (kept.size() > cap) {
            lo = mid;  // radius too small
            continue;
        }
        if (best.empty() ||
            std::llabs(static_cast<long long>(kept.size()) - static_cast<long long>(target)) <
                std::llabs(static_cast<long long>(best.size()) - static_cast<long long>(target)))
            best = kept;
        const std::size_t k = kept.size();
        if (k >= target - tol && k <= target + tol) break;
        if (k > target)
            lo = mid;
        else
            hi = mid;
    }
    if (best.empty()) best = greedy_pass(fm.rows, order, 0.0, n);
    return best;
}

FeatureMatrix take_rows(const FeatureMatrix& fm, std::span<const std::size_t> idx) {
    FeatureMatrix out;
    out.mode = fm.mode;
    out.rows.resize(static_cast<Eigen::Index>(idx.size()), fm.rows.cols());
    out.meta.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.rows.row(static_cast<Eigen::Index>(i)) =
            fm.rows.row(static_cast<Eigen::Index>(idx[i]));
        out.meta[i] = fm.meta[idx[i]];
    }
    return out;
}

}  // namespace abmphase::features
