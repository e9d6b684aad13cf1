#pragma once

#include <random>

#include "asmg/autodiff.hpp"
#include "asmg/geometry.hpp"
#include "asmg/graph.hpp"

namespace asmg {

// Graph conv layer with learned soft assignment of neighbors to filter
// heads: q_m(x_i, x_j) = softmax_m(u_m . (x_j - x_i) + c_m),
// y_i = b + sum_{j in N(i) u {i}} sum_m q_m W_m^T x_j / |N(i) u {i}|.
struct SpatialConvLayer {
    int d_in = 0, d_out = 0;
    std::vector<ad::Var> W;  // heads of d_in x d_out
    std::vector<ad::Var> u;  // heads of d_in x 1
    std::vector<ad::Var> c;  // heads of 1 x 1
    ad::Var b;               // 1 x d_out

    int heads() const { return static_cast<int>(W.size()); }

    void collect_params(std::vector<ad::Var>& out) const {
        for (auto& w : W) out.push_back(w);
        for (auto& v : u) out.push_back(v);
        for (auto& s : c) out.push_back(s);
        out.push_back(b);
    }
};

inline SpatialConvLayer make_conv_layer(int d_in, int d_out, int heads, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    double scale = std::sqrt(2.0 / (d_in + d_out));
    SpatialConvLayer layer;
    layer.d_in = d_in;
    layer.d_out = d_out;
    for (int m = 0; m < heads; ++m) {
        Mat w(d_in, d_out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = dist(rng) * scale;
        layer.W.push_back(ad::param(w));
        Mat uv(d_in, 1);
        for (Eigen::Index i = 0; i < uv.size(); ++i) uv(i) = dist(rng) * scale;
        layer.u.push_back(ad::param(uv));
        layer.c.push_back(ad::param(Mat::Zero(1, 1)));
    }
    layer.b = ad::param(Mat::Zero(1, d_out));
    return layer;
}

// Per-pair head assignment weights for one layer at fixed X (test hook;
// rows of the returned stack sum to 1 over heads for every (i,j)).
inline std::vector<Mat> conv_assignments(const Mat& X, const SpatialConvLayer& layer) {
    const int n = static_cast<int>(X.rows());
    const int mh = layer.heads();
    std::vector<Mat> logits(mh);
    for (int m = 0; m < mh; ++m) {
        Eigen::VectorXd t = X * layer.u[m]->val;
        logits[m] = t.transpose().replicate(n, 1) - t.replicate(1, n);
        logits[m].array() += layer.c[m]->val(0, 0);
    }
    Mat denom = Mat::Zero(n, n);
    Mat top = logits[0];
    for (int m = 1; m < mh; ++m) top = top.cwiseMax(logits[m]);
    std::vector<Mat> q(mh);
    for (int m = 0; m < mh; ++m) {
        q[m] = (logits[m] - top).array().exp().matrix();
        denom += q[m];
    }
    for (int m = 0; m < mh; ++m) q[m] = q[m].cwiseQuotient(denom);
    return q;
}

inline ad::Var spatial_conv_forward(ad::Var X, const Mat& adjacency,
                                    const SpatialConvLayer& layer) {
    const int n = static_cast<int>(X->val.rows());
    if (X->val.cols() != layer.d_in)
        throw std::invalid_argument("conv layer expects d_in=" + std::to_string(layer.d_in) +
                                    ", got " + std::to_string(X->val.cols()));
    if (adjacency.rows() != n)
        throw std::invalid_argument("adjacency size does not match feature rows");
    const int mh = layer.heads();
    Mat mask = adjacency + Mat::Identity(n, n);  // N(i) includes the center node
    Eigen::VectorXd deg = mask.rowwise().sum();
    Mat deg_inv = deg.cwiseInverse().replicate(1, layer.d_out);

    // logits_m[i][j] = u_m . (x_j - x_i) + c_m, via t = X u_m
    std::vector<ad::Var> logits(mh);
    for (int m = 0; m < mh; ++m) {
        ad::Var t = ad::matmul(X, layer.u[m]);  // N x 1
        ad::Var lm = ad::sub(ad::repeat_row(ad::transpose(t), n), ad::repeat_col(t, n));
        logits[m] = ad::add_scalar(lm, layer.c[m]);
    }
    // softmax across heads; subtract the elementwise max as a constant for
    // stability (softmax is shift-invariant, so the gradient is unaffected)
    Mat top = logits[0]->val;
    for (int m = 1; m < mh; ++m) top = top.cwiseMax(logits[m]->val);
    ad::Var denom;
    std::vector<ad::Var> expd(mh);
    for (int m = 0; m < mh; ++m) {
        expd[m] = ad::exp(ad::sub(logits[m], ad::constant(top)));
        denom = m == 0 ? expd[m] : ad::add(denom, expd[m]);
    }
    ad::Var out;
    for (int m = 0; m < mh; ++m) {
        ad::Var qm = ad::mul_const(ad::cdiv(expd[m], denom), mask);
        ad::Var contrib = ad::matmul(qm, ad::matmul(X, layer.W[m]));
        out = m == 0 ? contrib : ad::add(out, contrib);
    }
    out = ad::mul_const(out, deg_inv);
    return ad::add(out, ad::repeat_row(layer.b, n));
}

struct NodePosterior {
    ad::Var mean;     // N x d_z
    ad::Var log_var;  // N x d_z
};

struct FeatureNetConfig {
    FeatureMode mode = FeatureMode::Spatial;
    int d_z = 16;
    std::vector<int> widths = {16, 32};
    int heads = 4;
};

struct FeatureNetParams {
    FeatureNetConfig cfg;
    std::vector<SpatialConvLayer> encoder;  // d_x -> widths...
    SpatialConvLayer head_mean, head_log_var;
    ad::Var skip;  // d_x x d_z input skip into the posterior mean
    std::vector<SpatialConvLayer> decoder;  // d_z -> reversed widths -> d_x

    int input_dim() const { return cfg.mode == FeatureMode::Spatial ? 3 : 6; }

    std::vector<ad::Var> parameters() const {
        std::vector<ad::Var> out;
        for (auto& l : encoder) l.collect_params(out);
        head_mean.collect_params(out);
        head_log_var.collect_params(out);
        out.push_back(skip);
        for (auto& l : decoder) l.collect_params(out);
        return out;
    }
};

inline FeatureNetParams make_feature_net(const FeatureNetConfig& cfg, std::mt19937_64& rng) {
    FeatureNetParams p;
    p.cfg = cfg;
    int d_x = cfg.mode == FeatureMode::Spatial ? 3 : 6;
    int prev = d_x;
    for (int w : cfg.widths) {
        p.encoder.push_back(make_conv_layer(prev, w, cfg.heads, rng));
        prev = w;
    }
    p.head_mean = make_conv_layer(prev, cfg.d_z, cfg.heads, rng);
    p.head_log_var = make_conv_layer(prev, cfg.d_z, cfg.heads, rng);
    // identity on as many input channels as fit, so the posterior mean starts
    // out position-like and the attention logits are informative from step 0
    Mat s = Mat::Zero(d_x, cfg.d_z);
    for (int i = 0; i < std::min(d_x, cfg.d_z); ++i) s(i, i) = 1.0;
    p.skip = ad::param(s);
    prev = cfg.d_z;
    for (auto it = cfg.widths.rbegin(); it != cfg.widths.rend(); ++it) {
        p.decoder.push_back(make_conv_layer(prev, *it, cfg.heads, rng));
        prev = *it;
    }
    p.decoder.push_back(make_conv_layer(prev, d_x, cfg.heads, rng));
    return p;
}

inline void check_finite(const ad::Var& v, const char* stage, int layer_index) {
    if (!v->val.allFinite())
        throw std::runtime_error(std::string("non-finite values in ") + stage + " layer " +
                                 std::to_string(layer_index));
}

inline NodePosterior encode(const ShapeGraph& g, const FeatureNetParams& params) {
    if (g.feature_dim() != params.input_dim())
        throw std::invalid_argument("graph feature dim " + std::to_string(g.feature_dim()) +
                                    " does not match configured mode");
    ad::Var h = ad::constant(g.features);
    for (std::size_t i = 0; i < params.encoder.size(); ++i) {
        h = ad::tanh(spatial_conv_forward(h, g.adjacency, params.encoder[i]));
        check_finite(h, "encoder", static_cast<int>(i));
    }
    NodePosterior post;
    post.mean = ad::add(spatial_conv_forward(h, g.adjacency, params.head_mean),
                        ad::matmul(ad::constant(g.features), params.skip));
    post.log_var = spatial_conv_forward(h, g.adjacency, params.head_log_var);
    check_finite(post.mean, "posterior-mean", 0);
    check_finite(post.log_var, "posterior-logvar", 0);
    return post;
}

// z = mean + exp(log_var / 2) * eps; pass eps = 0 for deterministic eval
inline ad::Var reparameterize(const NodePosterior& post, const Mat& eps) {
    if (eps.size() == 0 || eps.isZero(0.0)) return post.mean;
    return ad::add(post.mean,
                   ad::hadamard(ad::exp(ad::scale(post.log_var, 0.5)), ad::constant(eps)));
}

inline ad::Var decode(ad::Var Z, const Mat& adjacency, const FeatureNetParams& params) {
    ad::Var h = Z;
    for (std::size_t i = 0; i < params.decoder.size(); ++i) {
        h = spatial_conv_forward(h, adjacency, params.decoder[i]);
        if (i + 1 < params.decoder.size()) h = ad::tanh(h);
        check_finite(h, "decoder", static_cast<int>(i));
    }
    return h;
}

// Differentiable normal consistency of the mesh with given faces and
// variable positions. Mean of (1 - cos) over shared-edge face pairs.
inline ad::Var normal_consistency_var(ad::Var pos, const std::vector<std::array<int, 3>>& faces) {
    std::vector<int> i0, i1, i2;
    for (const auto& tri : faces) {
        i0.push_back(tri[0]);
        i1.push_back(tri[1]);
        i2.push_back(tri[2]);
    }
    ad::Var a = ad::gather_rows(pos, i0);
    ad::Var n = ad::normalize_rows(
        ad::cross_rows(ad::sub(ad::gather_rows(pos, i1), a), ad::sub(ad::gather_rows(pos, i2), a)));
    // shared-edge face pairs
    std::vector<std::tuple<int, int, int>> edge_faces;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        for (int c = 0; c < 3; ++c) {
            int x = faces[f][c], y = faces[f][(c + 1) % 3];
            if (x > y) std::swap(x, y);
            edge_faces.emplace_back(x, y, f);
        }
    }
    std::sort(edge_faces.begin(), edge_faces.end());
    std::vector<int> f0, f1;
    for (std::size_t i = 0; i + 1 < edge_faces.size(); ++i) {
        if (std::get<0>(edge_faces[i]) == std::get<0>(edge_faces[i + 1]) &&
            std::get<1>(edge_faces[i]) == std::get<1>(edge_faces[i + 1])) {
            f0.push_back(std::get<2>(edge_faces[i]));
            f1.push_back(std::get<2>(edge_faces[i + 1]));
        }
    }
    if (f0.empty()) throw std::invalid_argument("mesh has no shared edges");
    ad::Var dots = ad::sum(ad::hadamard(ad::gather_rows(n, f0), ad::gather_rows(n, f1)));
    double p = static_cast<double>(f0.size());
    return ad::sub(ad::scalar(1.0), ad::scale(dots, 1.0 / p));
}

struct FeatureLossWeights {
    double w_kl = 1e-3;
    double w_norm = 1e-2;
};

// Negative ELBO: mean squared reconstruction error + w_kl * KL; hybrid mode
// adds w_norm * normal consistency of the reconstructed mesh.
inline ad::Var loss_feature(const ShapeGraph& g, ad::Var X_rec, const NodePosterior& post,
                            FeatureMode mode, const FeatureLossWeights& w,
                            const std::vector<std::array<int, 3>>* faces = nullptr) {
    if (w.w_kl < 0 || w.w_norm < 0)
        throw std::invalid_argument("loss_feature: negative weights");
    ad::Var recon =
        ad::scale(ad::squared_error(X_rec, ad::constant(g.features)),
                  1.0 / static_cast<double>(g.features.size()));
    ad::Var loss = ad::add(recon, ad::scale(ad::gaussian_kl(post.mean, post.log_var), w.w_kl));
    if (mode == FeatureMode::Hybrid && faces != nullptr && w.w_norm > 0) {
        ad::Var pos = ad::cols(X_rec, 0, 3);
        loss = ad::add(loss, ad::scale(normal_consistency_var(pos, *faces), w.w_norm));
    }
    return loss;
}

}  // namespace asmg
