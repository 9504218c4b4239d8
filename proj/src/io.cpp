#include "abmphase/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace abmphase::io {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    require(static_cast<bool>(f), "cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    require(static_cast<bool>(f), "cannot open for reading: " + path);
    return f;
}

json header_to_json(const TrajectoryFileHeader& h) {
    return json{{"format", "abm-trajectories"},
                {"version", 1},
                {"sigma", h.sigma},
                {"discarded", h.discarded},
                {"params",
                 {{"sigma", h.params.sigma},
                  {"theta", h.params.theta},
                  {"alpha", h.params.alpha},
                  {"nu", h.params.nu},
                  {"sigma_m", h.params.sigma_m}}},
                {"config",
                 {{"n_agents", h.cfg.n_agents},
                  {"dt", h.cfg.dt},
                  {"t_final", h.cfg.t_final},
                  {"snapshot_stride", h.cfg.snapshot_stride},
                  {"explosion_bound", h.cfg.explosion_bound},
                  {"seed", h.cfg.seed}}}};
}

TrajectoryFileHeader header_from_json(const json& j) {
    TrajectoryFileHeader h;
    h.sigma = j.at("sigma").get<double>();
    h.discarded = j.at("discarded").get<long>();
    const auto& p = j.at("params");
    h.params.sigma = p.at("sigma").get<double>();
    h.params.theta = p.at("theta").get<double>();
    h.params.alpha = p.at("alpha").get<double>();
    h.params.nu = p.at("nu").get<double>();
    h.params.sigma_m = p.at("sigma_m").get<double>();
    const auto& c = j.at("config");
    h.cfg.n_agents = c.at("n_agents").get<int>();
    h.cfg.dt = c.at("dt").get<double>();
    h.cfg.t_final = c.at("t_final").get<double>();
    h.cfg.snapshot_stride = c.at("snapshot_stride").get<int>();
    h.cfg.explosion_bound = c.at("explosion_bound").get<double>();
    h.cfg.seed = c.at("seed").get<std::uint64_t>();
    return h;
}

constexpr char kMagic[8] = {'A', 'B', 'M', 'T', 'R', 'J', '0', '1'};

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::Index Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw std::runtime_error("Table: no column named " + name);
}

void write_table(const std::string& path, const Table& t) {
    auto f = open_out(path);
    for (const auto& c : t.comments) f << "# " << c << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        f << t.columns[i] << (i + 1 < t.columns.size() ? "," : "\n");
    for (Eigen::Index r = 0; r < t.data.rows(); ++r)
        for (Eigen::Index c = 0; c < t.data.cols(); ++c)
            f << format_double(t.data(r, c)) << (c + 1 < t.data.cols() ? "," : "\n");
    require(static_cast<bool>(f), "write failed: " + path);
}

Table read_table(const std::string& path) {
    auto f = open_in(path);
    Table t;
    std::string line;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t start = line.find_first_not_of("# ");
            t.comments.push_back(start == std::string::npos ? "" : line.substr(start));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!have_header) {
            while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(t.columns.size());
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        require(row.size() == t.columns.size(), "ragged csv row in " + path);
        rows.push_back(std::move(row));
    }
    t.data.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(t.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            t.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return t;
}

void write_feature_csv(const std::string& path, const features::FeatureMatrix& fm) {
    fm.validate();
    Table t;
    t.comments.push_back(std::string("mode=") +
                         (fm.mode == features::FeatureMode::histograms ? "hist" : "moments"));
    t.columns = {"sigma", "trajectory_id", "time"};
    for (Eigen::Index j = 0; j < fm.rows.cols(); ++j)
        t.columns.push_back("f" + std::to_string(j));
    t.data.resize(fm.rows.rows(), 3 + fm.rows.cols());
    for (Eigen::Index i = 0; i < fm.rows.rows(); ++i) {
        const auto& m = fm.meta[static_cast<std::size_t>(i)];
        t.data(i, 0) = m.sigma;
        t.data(i, 1) = m.trajectory_id;
        t.data(i, 2) = m.time;
        t.data.row(i).tail(fm.rows.cols()) = fm.rows.row(i);
    }
    write_table(path, t);
}

features::FeatureMatrix read_feature_csv(const std::string& path) {
    const Table t = read_table(path);
    features::FeatureMatrix fm;
    fm.mode = features::FeatureMode::histograms;
    for (const auto& c : t.comments)
        if (c == "mode=moments") fm.mode = features::FeatureMode::moments;
    const Eigen::Index dim = t.data.cols() - 3;
    require(dim >= 1, "feature csv has no feature columns: " + path);
    fm.rows = t.data.rightCols(dim);
    fm.meta.resize(static_cast<std::size_t>(t.data.rows()));
    for (Eigen::Index i = 0; i < t.data.rows(); ++i)
        fm.meta[static_cast<std::size_t>(i)] = {t.data(i, 0), static_cast<int>(t.data(i, 1)),
                                                t.data(i, 2)};
    return fm;
}

void write_trajectories_bin(const std::string& path,
                            const std::vector<sim::Snapshot>& snaps,
                            const TrajectoryFileHeader& hdr) {
    auto f = open_out(path, true);
    f.write(kMagic, sizeof(kMagic));
    const std::string hj = header_to_json(hdr).dump();
    const std::uint32_t hlen = static_cast<std::uint32_t>(hj.size());
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(hj.data(), static_cast<std::streamsize>(hj.size()));
    const std::uint64_t n = snaps.size();
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const auto& s : snaps) {
        require(static_cast<int>(s.agents.size()) == hdr.cfg.n_agents,
                "snapshot width mismatch in " + path);
        const std::int32_t id = s.trajectory_id;
        f.write(reinterpret_cast<const char*>(&id), sizeof(id));
        f.write(reinterpret_cast<const char*>(&s.time), sizeof(s.time));
        f.write(reinterpret_cast<const char*>(s.agents.data()),
                static_cast<std::streamsize>(s.agents.size() * sizeof(double)));
    }
    require(static_cast<bool>(f), "write failed: " + path);
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<sim::Snapshot>& snaps,
                            const TrajectoryFileHeader& hdr) {
    auto f = open_out(path);
    f << "# " << header_to_json(hdr).dump() << "\n";
    f << "trajectory_id,time";
    for (int i = 1; i <= hdr.cfg.n_agents; ++i) f << ",x_" << i;
    f << "\n";
    for (const auto& s : snaps) {
        f << s.trajectory_id << "," << format_double(s.time);
        for (const double x : s.agents) f << "," << format_double(x);
        f << "\n";
    }
    require(static_cast<bool>(f), "write failed: " + path);
}

TrajectoryFile read_trajectories(const std::string& path) {
    auto f = open_in(path, true);
    char magic[8];
    f.read(magic, sizeof(magic));
    require(f.gcount() == 8, "truncated trajectory file: " + path);
    TrajectoryFile out;
    if (std::memcmp(magic, kMagic, 8) == 0) {
        std::uint32_t hlen = 0;
        f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
        std::string hj(hlen, '\0');
        f.read(hj.data(), hlen);
        out.header = header_from_json(json::parse(hj));
        std::uint64_t n = 0;
        f.read(reinterpret_cast<char*>(&n), sizeof(n));
        out.snapshots.resize(n);
        const int N = out.header.cfg.n_agents;
        for (auto& s : out.snapshots) {
            std::int32_t id = 0;
            f.read(reinterpret_cast<char*>(&id), sizeof(id));
            f.read(reinterpret_cast<char*>(&s.time), sizeof(s.time));
            s.agents.resize(static_cast<std::size_t>(N));
            f.read(reinterpret_cast<char*>(s.agents.data()),
                   static_cast<std::streamsize>(s.agents.size() * sizeof(double)));
            s.trajectory_id = id;
            s.sigma = out.header.sigma;
        }
        require(static_cast<bool>(f), "truncated trajectory file: " + path);
        return out;
    }

    // csv fallback
    f.close();
    auto g = open_in(path);
    std::string line;
    bool have_header_row = false;
    while (std::getline(g, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto start = line.find('{');
            require(start != std::string::npos, "missing json header in " + path);
            out.header = header_from_json(json::parse(line.substr(start)));
            continue;
        }
        if (!have_header_row) {
            have_header_row = true;  // column names
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        sim::Snapshot s;
        std::getline(ss, cell, ',');
        s.trajectory_id = std::atoi(cell.c_str());
        std::getline(ss, cell, ',');
        s.time = std::strtod(cell.c_str(), nullptr);
        s.agents.reserve(static_cast<std::size_t>(out.header.cfg.n_agents));
        while (std::getline(ss, cell, ','))
            s.agents.push_back(std::strtod(cell.c_str(), nullptr));
        require(static_cast<int>(s.agents.size()) == out.header.cfg.n_agents,
                "bad agent count in csv row: " + path);
        s.sigma = out.header.sigma;
        out.snapshots.push_back(std::move(s));
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    // row-major nested arrays
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto r = static_cast<Eigen::Index>(j.size());
    require(r > 0, "matrix_from_json: empty");
    const auto c = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k)
            m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    return m;
}

json mlp_to_json(const nn::Mlp& m) {
    json layers = json::array();
    for (const auto& l : m.layers) {
        layers.push_back({{"activation", l.act == nn::Activation::tanh_act ? "tanh" : "linear"},
                          {"out", l.W.rows()},
                          {"in", l.W.cols()},
                          {"W", matrix_to_json(l.W)},
                          {"b", vector_to_json(l.b)}});
    }
    return json{{"layers", layers}};
}

nn::Mlp mlp_from_json(const json& j) {
    nn::Mlp m;
    for (const auto& lj : j.at("layers")) {
        nn::Layer l;
        l.act = lj.at("activation").get<std::string>() == "tanh" ? nn::Activation::tanh_act
                                                                 : nn::Activation::linear;
        l.W = matrix_from_json(lj.at("W"));
        l.b = vector_from_json(lj.at("b"));
        m.layers.push_back(std::move(l));
    }
    m.validate();
    return m;
}

json scaler_to_json(const nn::Scaler& s) {
    return json{{"mode", s.mode() == nn::Scaler::Mode::minmax ? "minmax" : "whiten"},
                {"offset", vector_to_json(s.offset())},
                {"scale", vector_to_json(s.scale())}};
}

nn::Scaler scaler_from_json(const json& j) {
    const auto mode = j.at("mode").get<std::string>() == "minmax" ? nn::Scaler::Mode::minmax
                                                                  : nn::Scaler::Mode::whiten;
    return nn::Scaler::from_state(mode, vector_from_json(j.at("offset")),
                                  vector_from_json(j.at("scale")));
}

void save_ynet(const std::string& path, const cae::YNetModel& m, const json& meta) {
    json j{{"format", "ynet"},
           {"version", 1},
           {"encoder", mlp_to_json(m.encoder)},
           {"decoder", mlp_to_json(m.decoder)},
           {"estimator", mlp_to_json(m.estimator)},
           {"input_scaler", scaler_to_json(m.input_scaler)},
           {"sigma_scaler", scaler_to_json(m.sigma_scaler)},
           {"meta", meta}};
    write_json_file(path, j);
}

cae::YNetModel load_ynet(const std::string& path, json* meta) {
    const json j = read_json_file(path);
    require(j.at("format") == "ynet", "not a ynet model file: " + path);
    cae::YNetModel m;
    m.encoder = mlp_from_json(j.at("encoder"));
    m.decoder = mlp_from_json(j.at("decoder"));
    m.estimator = mlp_from_json(j.at("estimator"));
    m.input_scaler = scaler_from_json(j.at("input_scaler"));
    m.sigma_scaler = scaler_from_json(j.at("sigma_scaler"));
    if (meta) *meta = j.value("meta", json::object());
    return m;
}

void save_euler_net(const std::string& path, const odenet::EulerNetModel& m,
                    const json& meta) {
    json j{{"format", "euler-net"},
           {"version", 1},
           {"net", mlp_to_json(m.net)},
           {"h", m.h},
           {"state_scaler", scaler_to_json(m.state_scaler)},
           {"param_scaler", scaler_to_json(m.param_scaler)},
           {"train_nu2_min", m.train_nu2_min},
           {"train_nu2_max", m.train_nu2_max},
           {"meta", meta}};
    write_json_file(path, j);
}

odenet::EulerNetModel load_euler_net(const std::string& path, json* meta) {
    const json j = read_json_file(path);
    require(j.at("format") == "euler-net", "not an euler-net model file: " + path);
    odenet::EulerNetModel m;
    m.net = mlp_from_json(j.at("net"));
    m.h = j.at("h").get<double>();
    m.state_scaler = scaler_from_json(j.at("state_scaler"));
    m.param_scaler = scaler_from_json(j.at("param_scaler"));
    m.train_nu2_min = j.at("train_nu2_min").get<double>();
    m.train_nu2_max = j.at("train_nu2_max").get<double>();
    if (meta) *meta = j.value("meta", json::object());
    return m;
}

void write_embedding_csv(const std::string& path, const dmaps::DiffusionEmbedding& emb) {
    Table t;
    t.comments.push_back(std::string("mode=") +
                         (emb.mode == features::FeatureMode::histograms ? "hist" : "moments"));
    t.comments.push_back("epsilon=" + format_double(emb.epsilon));
    t.columns = {"sigma", "trajectory_id", "time"};
    const int K = emb.n_coords();
    for (int k = 1; k <= K; ++k) t.columns.push_back("psi" + std::to_string(k));
    t.data.resize(emb.eigenvectors.rows(), 3 + K);
    for (Eigen::Index i = 0; i < emb.eigenvectors.rows(); ++i) {
        const auto& m = emb.meta[static_cast<std::size_t>(i)];
        t.data(i, 0) = m.sigma;
        t.data(i, 1) = m.trajectory_id;
        t.data(i, 2) = m.time;
        for (int k = 1; k <= K; ++k) t.data(i, 2 + k) = emb.eigenvectors(i, k);
    }
    write_table(path, t);
}

void save_embedding_sidecar(const std::string& path, const dmaps::DiffusionEmbedding& emb) {
    json meta = json::array();
    for (const auto& m : emb.meta)
        meta.push_back({{"sigma", m.sigma}, {"trajectory_id", m.trajectory_id}, {"time", m.time}});
    json j{{"format", "diffusion-embedding"},
           {"version", 1},
           {"mode", emb.mode == features::FeatureMode::histograms ? "hist" : "moments"},
           {"epsilon", emb.epsilon},
           {"c", emb.c},
           {"eigenvalues", vector_to_json(emb.eigenvalues)},
           {"eigenvectors", matrix_to_json(emb.eigenvectors)},
           {"training_rows", matrix_to_json(emb.training_rows)},
           {"density_degrees", vector_to_json(emb.density_degrees)},
           {"markov_degrees", vector_to_json(emb.markov_degrees)},
           {"meta", meta}};
    write_json_file(path, j);
}

dmaps::DiffusionEmbedding load_embedding_sidecar(const std::string& path) {
    const json j = read_json_file(path);
    require(j.at("format") == "diffusion-embedding", "not an embedding sidecar: " + path);
    dmaps::DiffusionEmbedding emb;
    emb.mode = j.at("mode").get<std::string>() == "hist" ? features::FeatureMode::histograms
                                                         : features::FeatureMode::moments;
    emb.epsilon = j.at("epsilon").get<double>();
    emb.c = j.at("c").get<double>();
    emb.eigenvalues = vector_from_json(j.at("eigenvalues"));
    emb.eigenvectors = matrix_from_json(j.at("eigenvectors"));
    emb.training_rows = matrix_from_json(j.at("training_rows"));
    emb.density_degrees = vector_from_json(j.at("density_degrees"));
    emb.markov_degrees = vector_from_json(j.at("markov_degrees"));
    for (const auto& mj : j.at("meta"))
        emb.meta.push_back({mj.at("sigma").get<double>(), mj.at("trajectory_id").get<int>(),
                            mj.at("time").get<double>()});
    return emb;
}

void write_text_file(const std::string& path, const std::string& content) {
    auto f = open_out(path);
    f << content;
    require(static_cast<bool>(f), "write failed: " + path);
}

json read_json_file(const std::string& path) {
    auto f = open_in(path);
    json j;
    f >> j;
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << "\n";
    require(static_cast<bool>(f), "write failed: " + path);
}

}  // namespace abmphase::io
