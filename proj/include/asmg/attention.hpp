#pragma once

#include "asmg/autodiff.hpp"
#include "asmg/geometry.hpp"
#include "asmg/graph.hpp"

namespace asmg {

// Row-stochastic attention map from atlas vertices to source vertices.
struct CorrespondenceMap {
    Mat phi;  // N_mu x N_k, rows sum to 1
    double lambda = 1.0;
};

// Shape warped onto the atlas vertex set; carries the atlas adjacency.
struct NormalizedShape {
    MatX3 positions;  // N_mu x 3
    const Mat* atlas_adjacency = nullptr;
    std::string source_id;
};

// phi = Softmax(lambda Z_mu Z_k^T), softmax over the N_k axis per row.
inline ad::Var attention_var(ad::Var Z_mu, ad::Var Z_k, double lambda) {
    if (Z_mu->val.cols() != Z_k->val.cols())
        throw std::invalid_argument("attention: latent dims differ (" +
                                    std::to_string(Z_mu->val.cols()) + " vs " +
                                    std::to_string(Z_k->val.cols()) + ")");
    if (lambda < 0) throw std::invalid_argument("attention: lambda must be >= 0");
    return ad::softmax_rows(ad::scale(ad::matmul(Z_mu, ad::transpose(Z_k)), lambda));
}

inline CorrespondenceMap compute_attention(const Mat& Z_mu, const Mat& Z_k, double lambda) {
    CorrespondenceMap map;
    map.lambda = lambda;
    map.phi = attention_var(ad::constant(Z_mu), ad::constant(Z_k), lambda)->val;
    return map;
}

// X' = phi * positions(g_k); only positional columns are warped.
inline ad::Var warp_var(ad::Var phi, ad::Var positions_k) {
    if (phi->val.cols() != positions_k->val.rows())
        throw std::invalid_argument("warp: phi has " + std::to_string(phi->val.cols()) +
                                    " columns but shape has " +
                                    std::to_string(positions_k->val.rows()) + " vertices");
    return ad::matmul(phi, positions_k);
}

inline NormalizedShape warp(const CorrespondenceMap& map, const ShapeGraph& g_k,
                            const Mat& atlas_adjacency) {
    NormalizedShape out;
    out.positions =
        warp_var(ad::constant(map.phi), ad::constant(Mat(g_k.positions())))->val;
    out.atlas_adjacency = &atlas_adjacency;
    return out;
}

struct RefinementWeights {
    double w_cd = 1.0;
    double w_lap = 1.0;
};

// w_cd * CD(g_k, g'_k) + w_lap * Laplacian(g'_k) on the atlas graph.
inline ad::Var refinement_loss_var(ad::Var positions_k, ad::Var warped,
                                   const std::vector<std::vector<int>>& atlas_neighbors,
                                   const RefinementWeights& w) {
    if (w.w_cd < 0 || w.w_lap < 0)
        throw std::invalid_argument("refinement_loss: negative weights");
    ad::Var cd = ad::chamfer(positions_k, warped);
    ad::Var lap = ad::laplacian(warped, atlas_neighbors);
    return ad::add(ad::scale(cd, w.w_cd), ad::scale(lap, w.w_lap));
}

inline double refinement_loss(const ShapeGraph& g_k, const NormalizedShape& warped,
                              const std::vector<std::vector<int>>& atlas_neighbors,
                              const RefinementWeights& w) {
    return refinement_loss_var(ad::constant(Mat(g_k.positions())),
                               ad::constant(Mat(warped.positions)), atlas_neighbors, w)
        ->val(0, 0);
}

}  // namespace asmg
