#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abmphase/sim.hpp"

namespace abmphase::features {

struct RowMeta {
    double sigma = 0.0;
    int trajectory_id = 0;
    double time = 0.0;
};

// Density-normalized histogram of one ensemble snapshot. Agents outside
// [lo, hi] are clipped into the boundary bins; the clip count is kept.
struct Histogram {
    std::vector<double> density;   // length = bins; sum(density) * bin_width = 1
    std::vector<double> edges;     // length = bins + 1
    RowMeta meta;
    long clipped = 0;

    double bin_width() const { return edges[1] - edges[0]; }
};

// Raw moments M1..M4 of one snapshot.
struct MomentVector {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    RowMeta meta;
};

enum class FeatureMode { histograms, moments };

// Row-per-sample feature collection fed to the embedding.
struct FeatureMatrix {
    Eigen::MatrixXd rows;          // n_samples x dim
    std::vector<RowMeta> meta;     // length n_samples
    FeatureMode mode = FeatureMode::histograms;

    std::size_t size() const { return meta.size(); }
    void validate() const;
};

Histogram histogram(const sim::Snapshot& s, int bins = 40, double lo = -4.0,
                    double hi = 4.0);

MomentVector moments(const sim::Snapshot& s);

// Drop snapshots with time < t_cut. Errors if nothing survives.
std::vector<sim::Snapshot> cut_transient(std::span<const sim::Snapshot> traj, double t_cut);

FeatureMatrix build_feature_matrix(std::span<const sim::Snapshot> snapshots,
                                   FeatureMode mode, int bins = 40, double lo = -4.0,
                                   double hi = 4.0);

// Greedy distance-based thinning. Rows are visited in a seeded random
// order and kept iff they are farther than a radius from every previously
// kept row; the radius is found by bisection so the kept count lands
// within 5% of the target. Returns kept row indices in visit order.
std::vector<std::size_t> subsample(const FeatureMatrix& fm, std::size_t target,
                                   std::uint64_t seed);

FeatureMatrix take_rows(const FeatureMatrix& fm, std::span<const std::size_t> idx);

}  // namespace abmphase::features
