#pragma once

#include "asmg/graph.hpp"

namespace asmg {

// Reference mesh with fixed adjacency; vertex positions are refined by
// Jacobi sweeps on the quadratic atlas objective.
struct Atlas {
    MatX3 positions;  // N_mu x 3
    MatX3 reference;  // fixed template geometry the atlas was seeded from
    Mat adjacency;    // fixed
    std::vector<std::vector<int>> neighbors;
    std::vector<std::array<int, 3>> faces;  // kept for mesh export
    int iteration = 0;

    int size() const { return static_cast<int>(positions.rows()); }

    SurfaceMesh mesh() const { return SurfaceMesh{positions, faces}; }
    ShapeGraph graph(FeatureMode mode) const {
        if (mode == FeatureMode::Spatial) return make_graph(adjacency, positions);
        return build_graph(mesh(), mode);
    }
};

inline Atlas make_atlas(const SurfaceMesh& mesh) {
    validate_mesh(mesh);
    Atlas a;
    ShapeGraph g = build_graph(mesh, FeatureMode::Spatial);
    a.positions = mesh.vertices;
    a.reference = mesh.vertices;
    a.adjacency = g.adjacency;
    a.neighbors = g.neighbors;
    a.faces = mesh.faces;
    return a;
}

// gamma = N_mu / max_j |N(j)|
inline double gamma_rule(const Atlas& atlas) {
    std::size_t max_deg = 0;
    for (const auto& n : atlas.neighbors) max_deg = std::max(max_deg, n.size());
    return static_cast<double>(atlas.size()) / static_cast<double>(max_deg);
}

// 1/2 sum_k sum_j |x'_kj - x_mu_j|^2 + gamma/2 sum_{j<q} a_jq |x_mu_j - x_mu_q|^2
// The smoothness term counts each edge once so that the Jacobi sweep below
// is exactly its coordinate-wise minimizer.
inline double atlas_objective(const std::vector<MatX3>& warped, const MatX3& positions,
                              const Mat& adjacency, double gamma) {
    double data = 0.0;
    for (const auto& w : warped) data += (w - positions).rowwise().squaredNorm().sum();
    double smooth = 0.0;
    const int n = static_cast<int>(positions.rows());
    for (int j = 0; j < n; ++j)
        for (int q = j + 1; q < n; ++q)
            if (adjacency(j, q) > 0.0)
                smooth += (positions.row(j) - positions.row(q)).squaredNorm();
    return 0.5 * data + 0.5 * gamma * smooth;
}

// One Jacobi sweep of the closed-form update:
// x_mu_j <- (sum_k x'_kj + gamma sum_{q in N(j)} x_mu_q) / (K + gamma sum_q a_jq)
inline Atlas update_atlas(const std::vector<MatX3>& warped, const Atlas& atlas,
                          double gamma = -1.0) {
    if (warped.empty()) throw std::invalid_argument("update_atlas: empty warped list");
    const int n = atlas.size();
    for (const auto& w : warped)
        if (w.rows() != n)
            throw std::invalid_argument("update_atlas: warped shape cardinality mismatch");
    if (gamma < 0) gamma = gamma_rule(atlas);
    const double K = static_cast<double>(warped.size());
    Atlas next = atlas;
    for (int j = 0; j < n; ++j) {
        Eigen::RowVector3d numer = Eigen::RowVector3d::Zero();
        for (const auto& w : warped) numer += w.row(j);
        double denom = K;
        for (int q : atlas.neighbors[j]) {
            numer += gamma * atlas.positions.row(q);
            denom += gamma * atlas.adjacency(j, q);
        }
        next.positions.row(j) = numer / denom;
    }
    next.iteration = atlas.iteration + 1;
    return next;
}

// Iterate sweeps until max vertex displacement < tol or max_sweeps.
inline Atlas refine_atlas(const std::vector<MatX3>& warped, Atlas atlas, double gamma = -1.0,
                          double tol = 1e-6, int max_sweeps = 100) {
    for (int s = 0; s < max_sweeps; ++s) {
        Atlas next = update_atlas(warped, atlas, gamma);
        double disp = (next.positions - atlas.positions).rowwise().norm().maxCoeff();
        atlas = std::move(next);
        if (disp < tol) break;
    }
    return atlas;
}

// Soft shape-to-cluster weights; alpha controls the de-weighting degree.
struct ClusterWeights {
    Mat W;  // K x M, rows sum to 1
    double alpha = 1.0;
};

// K x M matrix of mean squared errors between normalized shapes and atlases.
inline Mat distance_matrix(const std::vector<std::vector<MatX3>>& warped_per_cluster,
                           const std::vector<Atlas>& atlases) {
    const int m = static_cast<int>(atlases.size());
    if (m == 0 || warped_per_cluster.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("distance_matrix: cluster count mismatch");
    const int k = static_cast<int>(warped_per_cluster[0].size());
    Mat d(k, m);
    for (int c = 0; c < m; ++c) {
        if (static_cast<int>(warped_per_cluster[c].size()) != k)
            throw std::invalid_argument("distance_matrix: ragged warped lists");
        for (int s = 0; s < k; ++s)
            d(s, c) = (warped_per_cluster[c][s] - atlases[c].positions).rowwise().squaredNorm().sum() /
                      static_cast<double>(atlases[c].size());
    }
    return d;
}

// alpha default: 1 / population std over all K*M entries
inline double default_alpha(const Mat& d) {
    double mean = d.mean();
    double var = (d.array() - mean).square().sum() / static_cast<double>(d.size());
    double sd = std::sqrt(var);
    if (sd < 1e-12) return 1.0;
    return 1.0 / sd;
}

// w_km = exp(-alpha d_km) / sum_m exp(-alpha d_km)
inline ClusterWeights cluster_weights(const Mat& d, double alpha = -1.0) {
    if (d.size() == 0) throw std::invalid_argument("cluster_weights: empty distance matrix");
    if ((d.array() < 0).any()) throw std::invalid_argument("cluster_weights: negative distances");
    if (alpha < 0) alpha = default_alpha(d);
    ClusterWeights cw;
    cw.alpha = alpha;
    cw.W.resize(d.rows(), d.cols());
    for (Eigen::Index k = 0; k < d.rows(); ++k) {
        Eigen::RowVectorXd logits = -alpha * d.row(k);
        logits.array() -= logits.maxCoeff();
        Eigen::RowVectorXd e = logits.array().exp();
        cw.W.row(k) = e / e.sum();
    }
    return cw;
}

// Weighted multi-atlas cost, Laplacian term per cluster with its own gamma.
inline double multi_atlas_objective(const std::vector<Atlas>& atlases,
                                    const std::vector<std::vector<MatX3>>& warped_per_cluster,
                                    const Mat& W, const std::vector<double>& gammas) {
    double total = 0.0;
    for (std::size_t m = 0; m < atlases.size(); ++m) {
        const Atlas& a = atlases[m];
        double data = 0.0;
        for (std::size_t k = 0; k < warped_per_cluster[m].size(); ++k)
            data += W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) *
                    (warped_per_cluster[m][k] - a.positions).rowwise().squaredNorm().sum();
        double smooth = 0.0;
        for (int j = 0; j < a.size(); ++j)
            for (int q = j + 1; q < a.size(); ++q)
                if (a.adjacency(j, q) > 0.0)
                    smooth += (a.positions.row(j) - a.positions.row(q)).squaredNorm();
        total += 0.5 * data + 0.5 * gammas[m] * smooth;
    }
    return total;
}

// Per-cluster weighted Jacobi sweep (one sweep per call).
inline std::vector<Atlas> update_multi_atlas(const std::vector<Atlas>& atlases,
                                             const std::vector<std::vector<MatX3>>& warped_per_cluster,
                                             const Mat& W, double gamma_override = -1.0) {
    std::vector<Atlas> out;
    out.reserve(atlases.size());
    for (std::size_t m = 0; m < atlases.size(); ++m) {
        const Atlas& a = atlases[m];
        double gamma = gamma_override < 0 ? gamma_rule(a) : gamma_override;
        double wsum = W.col(static_cast<Eigen::Index>(m)).sum();
        if (wsum == 0.0 && gamma == 0.0)
            throw std::invalid_argument("update_multi_atlas: cluster " + std::to_string(m) +
                                        " has zero total weight and zero gamma");
        Atlas next = a;
        for (int j = 0; j < a.size(); ++j) {
            Eigen::RowVector3d numer = Eigen::RowVector3d::Zero();
            double denom = 0.0;
            for (std::size_t k = 0; k < warped_per_cluster[m].size(); ++k) {
                double w = W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
                numer += w * warped_per_cluster[m][k].row(j);
                denom += w;
            }
            for (int q : a.neighbors[j]) {
                numer += gamma * a.positions.row(q);
                denom += gamma * a.adjacency(j, q);
            }
            next.positions.row(j) = numer / denom;
        }
        next.iteration = a.iteration + 1;
        out.push_back(std::move(next));
    }
    return out;
}

inline std::vector<Atlas> refine_multi_atlas(std::vector<Atlas> atlases,
                                             const std::vector<std::vector<MatX3>>& warped_per_cluster,
                                             const Mat& W, double tol = 1e-6,
                                             int max_sweeps = 100, double gamma_override = -1.0) {
    for (int s = 0; s < max_sweeps; ++s) {
        auto next = update_multi_atlas(atlases, warped_per_cluster, W, gamma_override);
        double disp = 0.0;
        for (std::size_t m = 0; m < atlases.size(); ++m)
            disp = std::max(disp,
                            (next[m].positions - atlases[m].positions).rowwise().norm().maxCoeff());
        atlases = std::move(next);
        if (disp < tol) break;
    }
    return atlases;
}

}  // namespace asmg
