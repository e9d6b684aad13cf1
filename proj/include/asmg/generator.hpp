#pragma once

#include <random>

#include "asmg/autodiff.hpp"
#include "asmg/mesh.hpp"

namespace asmg {

struct DenseLayer {
    ad::Var W;  // d_in x d_out
    ad::Var b;  // 1 x d_out
};

inline DenseLayer make_dense(int d_in, int d_out, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    double scale = std::sqrt(2.0 / (d_in + d_out));
    Mat w(d_in, d_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = dist(rng) * scale;
    return {ad::param(w), ad::param(Mat::Zero(1, d_out))};
}

// beta-VAE over flattened normalized shapes: encoder 3N -> hidden -> 2L,
// decoder mirrored.
struct GeneratorParams {
    int n_mu = 0;    // atlas cardinality
    int latent = 16;
    std::vector<DenseLayer> encoder;  // last layer outputs 2L (mean | log_var)
    std::vector<DenseLayer> decoder;  // last layer outputs 3N
    bool trained = false;

    std::vector<ad::Var> parameters() const {
        std::vector<ad::Var> out;
        for (auto& l : encoder) {
            out.push_back(l.W);
            out.push_back(l.b);
        }
        for (auto& l : decoder) {
            out.push_back(l.W);
            out.push_back(l.b);
        }
        return out;
    }
};

inline GeneratorParams make_generator(int n_mu, int latent, std::mt19937_64& rng,
                                      const std::vector<int>& hidden = {256, 64}) {
    GeneratorParams p;
    p.n_mu = n_mu;
    p.latent = latent;
    int prev = 3 * n_mu;
    for (int h : hidden) {
        p.encoder.push_back(make_dense(prev, h, rng));
        prev = h;
    }
    p.encoder.push_back(make_dense(prev, 2 * latent, rng));
    prev = latent;
    for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) {
        p.decoder.push_back(make_dense(prev, *it, rng));
        prev = *it;
    }
    p.decoder.push_back(make_dense(prev, 3 * n_mu, rng));
    return p;
}

inline ad::Var dense_stack(ad::Var x, const std::vector<DenseLayer>& layers) {
    ad::Var h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = ad::add(ad::matmul(h, layers[i].W), layers[i].b);
        if (i + 1 < layers.size()) h = ad::tanh(h);
    }
    return h;
}

struct LatentPosterior {
    ad::Var mean;     // 1 x L
    ad::Var log_var;  // 1 x L
};

// Encode a normalized shape (row-major flattening over atlas vertex order).
inline LatentPosterior gen_encode_var(ad::Var X_norm, const GeneratorParams& p) {
    if (X_norm->val.rows() != p.n_mu || X_norm->val.cols() != 3)
        throw std::invalid_argument("gen_encode: expected " + std::to_string(p.n_mu) +
                                    "x3 input, got " + std::to_string(X_norm->val.rows()) + "x" +
                                    std::to_string(X_norm->val.cols()));
    ad::Var flat = ad::reshape_rowmajor(X_norm, 1, 3 * p.n_mu);
    ad::Var h = dense_stack(flat, p.encoder);
    return {ad::cols(h, 0, p.latent), ad::cols(h, p.latent, p.latent)};
}

inline ad::Var gen_decode_var(ad::Var z, const GeneratorParams& p) {
    if (z->val.cols() != p.latent || z->val.rows() != 1)
        throw std::invalid_argument("gen_decode: expected 1x" + std::to_string(p.latent) +
                                    " latent");
    ad::Var flat = dense_stack(z, p.decoder);
    return ad::reshape_rowmajor(flat, p.n_mu, 3);
}

inline MatX3 gen_decode(const Eigen::RowVectorXd& z, const GeneratorParams& p) {
    return gen_decode_var(ad::constant(z), p)->val;
}

// Squared-Euclidean reconstruction + beta * KL.
inline ad::Var loss_generation(ad::Var X_norm, ad::Var X_rec, const LatentPosterior& post,
                               double beta) {
    if (beta < 0) throw std::invalid_argument("loss_generation: beta must be >= 0");
    ad::Var recon = ad::squared_error(X_rec, X_norm);
    return ad::add(recon, ad::scale(ad::gaussian_kl(post.mean, post.log_var), beta));
}

inline ad::Var gen_reparameterize(const LatentPosterior& post, const Eigen::RowVectorXd& eps) {
    if (eps.size() == 0 || eps.isZero(0.0)) return post.mean;
    return ad::add(post.mean,
                   ad::hadamard(ad::exp(ad::scale(post.log_var, 0.5)), ad::constant(eps)));
}

// Cluster-weighted sum of per-shape beta-VAE losses; shapes with zero
// weight contribute nothing (and no gradient).
inline ad::Var loss_generation_weighted(const std::vector<Mat>& shapes,
                                        const Eigen::VectorXd& weights,
                                        const GeneratorParams& p, double beta,
                                        const std::vector<Eigen::RowVectorXd>& eps = {}) {
    if (shapes.empty()) throw std::invalid_argument("loss_generation_weighted: empty cohort");
    if (weights.size() != static_cast<Eigen::Index>(shapes.size()))
        throw std::invalid_argument("loss_generation_weighted: weight count mismatch");
    ad::Var total = ad::scalar(0.0);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        if (weights(static_cast<Eigen::Index>(k)) == 0.0) continue;
        ad::Var x = ad::constant(shapes[k]);
        LatentPosterior post = gen_encode_var(x, p);
        Eigen::RowVectorXd e = k < eps.size() ? eps[k] : Eigen::RowVectorXd();
        ad::Var rec = gen_decode_var(gen_reparameterize(post, e), p);
        total = ad::add(total, ad::scale(loss_generation(x, rec, post, beta),
                                         weights(static_cast<Eigen::Index>(k))));
    }
    return total;
}

// Log-linear interpolation between the endpoint values over decay_steps.
struct BetaSchedule {
    double start = 2e-3;
    double end = 2e-6;
    int decay_steps = 1;

    double at(int step) const {
        if (start <= 0 || end <= 0) throw std::invalid_argument("beta schedule needs positive values");
        if (decay_steps <= 0 || step >= decay_steps) return end;
        double t = static_cast<double>(std::max(step, 0)) / decay_steps;
        return std::exp((1.0 - t) * std::log(start) + t * std::log(end));
    }
};

struct SyntheticSample {
    MatX3 positions;
    int cluster = 0;
    Eigen::RowVectorXd latent;
};

// Ancestral sampling: draw a cluster from p(m) ~ cluster_prior, then a
// latent from N(0,I), then decode with that cluster's generator.
inline std::vector<SyntheticSample> sample_population(
    const std::vector<const GeneratorParams*>& generators, int count, std::uint64_t seed,
    const Eigen::VectorXd& cluster_prior = Eigen::VectorXd()) {
    if (generators.empty()) throw std::invalid_argument("sample_population: no generators");
    for (auto* g : generators)
        if (!g->trained) throw std::invalid_argument("sample_population: untrained generator");
    Eigen::VectorXd prior = cluster_prior;
    if (prior.size() == 0) prior = Eigen::VectorXd::Ones(static_cast<int>(generators.size()));
    if (prior.size() != static_cast<Eigen::Index>(generators.size()))
        throw std::invalid_argument("cluster prior size mismatch");
    prior /= prior.sum();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> pick(prior.data(), prior.data() + prior.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<SyntheticSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        SyntheticSample s;
        s.cluster = generators.size() == 1 ? 0 : pick(rng);
        const GeneratorParams& g = *generators[s.cluster];
        s.latent.resize(g.latent);
        for (int l = 0; l < g.latent; ++l) s.latent(l) = gauss(rng);
        s.positions = gen_decode(s.latent, g);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace asmg
