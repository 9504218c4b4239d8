#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <vector>

#include "abmphase/cae.hpp"
#include "abmphase/dmaps.hpp"
#include "abmphase/features.hpp"
#include "abmphase/odenet.hpp"
#include "abmphase/sim.hpp"

namespace abmphase::io {

using nlohmann::json;

// ---- generic CSV ----

// Numeric table: '#' comment lines, then a header row, then data rows.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    Eigen::MatrixXd data;

    Eigen::Index col(const std::string& name) const;
};

void write_table(const std::string& path, const Table& t);
Table read_table(const std::string& path);

std::string format_double(double v);

// ---- feature matrices ----
// Layout: sigma, trajectory_id, time, f0..f{dim-1}; mode in a comment line.

void write_feature_csv(const std::string& path, const features::FeatureMatrix& fm);
features::FeatureMatrix read_feature_csv(const std::string& path);

// ---- trajectory files (one per sigma value) ----

struct TrajectoryFileHeader {
    sim::ModelParams params;
    sim::SimConfig cfg;
    double sigma = 0.0;
    long discarded = 0;
};

// Framed binary layout (little-endian):
//   magic "ABMTRJ01" | u32 header_json_len | header json |
//   u64 n_snapshots | repeated { i32 trajectory_id, f64 time, f64 x[N] }
void write_trajectories_bin(const std::string& path,
                            const std::vector<sim::Snapshot>& snaps,
                            const TrajectoryFileHeader& hdr);

// CSV layout: '#' header lines with the same json, then
//   trajectory_id,time,x_1..x_N
void write_trajectories_csv(const std::string& path,
                            const std::vector<sim::Snapshot>& snaps,
                            const TrajectoryFileHeader& hdr);

struct TrajectoryFile {
    std::vector<sim::Snapshot> snapshots;
    TrajectoryFileHeader header;
};

TrajectoryFile read_trajectories(const std::string& path);  // sniffs bin vs csv

// ---- model and embedding serialization (json) ----

json mlp_to_json(const nn::Mlp& m);
nn::Mlp mlp_from_json(const json& j);
json scaler_to_json(const nn::Scaler& s);
nn::Scaler scaler_from_json(const json& j);

void save_ynet(const std::string& path, const cae::YNetModel& m, const json& meta = {});
cae::YNetModel load_ynet(const std::string& path, json* meta = nullptr);

void save_euler_net(const std::string& path, const odenet::EulerNetModel& m,
                    const json& meta = {});
odenet::EulerNetModel load_euler_net(const std::string& path, json* meta = nullptr);

// Embedding coordinates as CSV (sigma, trajectory_id, time, psi_1..psi_K)
// and a json sidecar carrying eigenvalues, kernel scale, degrees and the
// retained training rows needed by the out-of-sample extension.
void write_embedding_csv(const std::string& path, const dmaps::DiffusionEmbedding& emb);
void save_embedding_sidecar(const std::string& path, const dmaps::DiffusionEmbedding& emb);
dmaps::DiffusionEmbedding load_embedding_sidecar(const std::string& path);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace abmphase::io
