#pragma once

#include <json.hpp>

#include "asmg/atlas.hpp"
#include "asmg/attention.hpp"
#include "asmg/checkpoint.hpp"
#include "asmg/feature_net.hpp"
#include "asmg/generator.hpp"
#include "asmg/metrics.hpp"
#include "asmg/optimizer.hpp"
#include "asmg/synth.hpp"

namespace asmg {

struct TrainConfig {
    FeatureMode mode = FeatureMode::Spatial;
    int clusters = 1;  // M
    int epochs = 150;
    double learning_rate = 1e-3;
    double w_kl = 1e-3;
    double w_norm = 1e-2;
    double w_cd = 1.0;
    double w_lap = 1.0;
    BetaSchedule beta;          // decay_steps <= 0 means "over all epochs"
    double lambda = 10.0;       // attention scale; effective value lambda/sqrt(d_z)
    double atlas_gamma = -1.0;  // smoothing weight for the epoch sweep; <0 = N_mu/max-degree rule
    double cluster_alpha_scale = 1.0;  // multiplier on the 1/std rule for Eq. 10 sharpness
    bool refinement = true;     // ablation flag; off reproduces the ASM variant
    std::uint64_t seed = 0;
    int d_z = 16;
    std::vector<int> conv_widths = {16, 32};
    int conv_heads = 4;
    int gen_latent = 16;
    std::vector<int> gen_hidden = {256, 64};
    std::vector<std::string> atlas_init;  // mesh files; empty = pick from cohort
    std::string dataset;                  // cohort directory
    int checkpoint_every = 0;             // 0 = final only

    double effective_lambda() const { return lambda / std::sqrt(static_cast<double>(d_z)); }

    void validate() const {
        if (clusters < 1) throw std::invalid_argument("config: clusters must be >= 1");
        if (epochs < 0) throw std::invalid_argument("config: negative epoch count");
        if (w_kl < 0 || w_norm < 0 || w_cd < 0 || w_lap < 0)
            throw std::invalid_argument("config: loss weights must be >= 0");
        if (lambda < 0) throw std::invalid_argument("config: lambda must be >= 0");
    }
};

inline void apply_profile(TrainConfig& cfg, const std::string& profile) {
    if (profile == "lv") {
        cfg.w_cd = 1.0;
        cfg.w_lap = 1.0;
        cfg.beta = {2e-3, 2e-6, 0};
    } else if (profile == "liver") {
        cfg.w_cd = 1.0;
        cfg.w_lap = 1.2;
        cfg.beta = {1e-3, 2e-3, 0};
    } else {
        throw std::invalid_argument("unknown profile: " + profile);
    }
    cfg.w_kl = 1e-3;
    cfg.w_norm = 1e-2;
}

inline TrainConfig parse_train_config(const nlohmann::json& j) {
    TrainConfig cfg;
    if (j.contains("profile")) apply_profile(cfg, j["profile"]);
    if (j.contains("mode")) cfg.mode = feature_mode_from_string(j["mode"]);
    if (j.contains("clusters")) cfg.clusters = j["clusters"];
    if (j.contains("epochs")) cfg.epochs = j["epochs"];
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"];
    if (j.contains("w_kl")) cfg.w_kl = j["w_kl"];
    if (j.contains("w_norm")) cfg.w_norm = j["w_norm"];
    if (j.contains("w_cd")) cfg.w_cd = j["w_cd"];
    if (j.contains("w_lap")) cfg.w_lap = j["w_lap"];
    if (j.contains("beta_start")) cfg.beta.start = j["beta_start"];
    if (j.contains("beta_end")) cfg.beta.end = j["beta_end"];
    if (j.contains("beta_decay_steps")) cfg.beta.decay_steps = j["beta_decay_steps"];
    if (j.contains("lambda")) cfg.lambda = j["lambda"];
    if (j.contains("atlas_gamma")) cfg.atlas_gamma = j["atlas_gamma"];
    if (j.contains("cluster_alpha_scale")) cfg.cluster_alpha_scale = j["cluster_alpha_scale"];
    if (j.contains("refinement")) cfg.refinement = j["refinement"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("d_z")) cfg.d_z = j["d_z"];
    if (j.contains("conv_widths")) cfg.conv_widths = j["conv_widths"].get<std::vector<int>>();
    if (j.contains("conv_heads")) cfg.conv_heads = j["conv_heads"];
    if (j.contains("gen_latent")) cfg.gen_latent = j["gen_latent"];
    if (j.contains("gen_hidden")) cfg.gen_hidden = j["gen_hidden"].get<std::vector<int>>();
    if (j.contains("atlas_init")) cfg.atlas_init = j["atlas_init"].get<std::vector<std::string>>();
    if (j.contains("dataset")) cfg.dataset = j["dataset"];
    if (j.contains("checkpoint_every")) cfg.checkpoint_every = j["checkpoint_every"];
    cfg.validate();
    return cfg;
}

struct EpochLog {
    int epoch = 0;
    double l_psi = 0, l_ref = 0, l_g = 0;
    double atlas_displacement = 0;
};

struct PipelineState {
    TrainConfig config;
    FeatureNetParams psi;
    std::vector<Atlas> atlases;
    std::vector<GeneratorParams> generators;  // one per cluster
    ClusterWeights weights;                   // K x M (training cohort)
    std::vector<EpochLog> log;
    std::mt19937_64 rng;
};

// Matching embeddings Z_mu come from the atlas's fixed reference template,
// standardized to zero mean and unit RMS. Feeding the per-epoch-resmoothed
// positions back through Psi makes the warp -> sweep -> warp loop a contraction
// that steadily merges atlas vertices at this cohort scale; the template keeps
// each atlas vertex's identity stable while the positions follow the sweeps.
inline ShapeGraph atlas_feature_graph(const Atlas& atlas, FeatureMode mode) {
    SurfaceMesh m{atlas.reference, atlas.faces};
    m.vertices.rowwise() -= m.vertices.colwise().mean().eval();
    double rms = std::sqrt(m.vertices.rowwise().squaredNorm().mean());
    if (rms > 1e-12) m.vertices /= rms;
    return build_graph(m, mode);
}

// All intermediates of Psi -> ATT -> G for one shape against one atlas,
// evaluated with eps = 0.
struct ForwardPass {
    Mat Z_k, Z_mu;
    Mat phi;
    MatX3 warped;
    Mat X_rec;             // feature-net reconstruction
    Mat post_mean, post_log_var;
    Eigen::RowVectorXd gen_mean, gen_log_var;
    MatX3 gen_rec;
};

inline ForwardPass forward_pass(const ShapeGraph& g_k, const Atlas& atlas,
                                const FeatureNetParams& psi, const GeneratorParams& gen,
                                double effective_lambda) {
    ForwardPass fp;
    NodePosterior post_k = encode(g_k, psi);
    NodePosterior post_mu = encode(atlas_feature_graph(atlas, psi.cfg.mode), psi);
    fp.Z_k = post_k.mean->val;
    fp.Z_mu = post_mu.mean->val;
    fp.post_mean = post_k.mean->val;
    fp.post_log_var = post_k.log_var->val;
    fp.X_rec = decode(post_k.mean, g_k.adjacency, psi)->val;
    ad::Var phi = attention_var(post_mu.mean, post_k.mean, effective_lambda);
    fp.phi = phi->val;
    fp.warped = warp_var(phi, ad::constant(Mat(g_k.positions())))->val;
    LatentPosterior lat = gen_encode_var(ad::constant(Mat(fp.warped)), gen);
    fp.gen_mean = lat.mean->val;
    fp.gen_log_var = lat.log_var->val;
    fp.gen_rec = gen_decode_var(lat.mean, gen)->val;
    return fp;
}

namespace detail {

// Farthest-point selection of M initial atlas shapes by Chamfer distance.
inline std::vector<int> pick_atlas_seeds(const std::vector<ShapeGraph>& graphs, int m) {
    std::vector<int> picks = {0};
    while (static_cast<int>(picks.size()) < m) {
        int best = -1;
        double best_d = -1;
        for (int k = 0; k < static_cast<int>(graphs.size()); ++k) {
            if (std::find(picks.begin(), picks.end(), k) != picks.end()) continue;
            double d = std::numeric_limits<double>::infinity();
            for (int p : picks)
                d = std::min(d, chamfer_distance(graphs[k].positions(), graphs[p].positions()));
            if (d > best_d) {
                best_d = d;
                best = k;
            }
        }
        picks.push_back(best);
    }
    return picks;
}

}  // namespace detail

class Pipeline {
  public:
    Pipeline(TrainConfig config, const std::vector<SurfaceMesh>& meshes)
        : state_{std::move(config)} {
        state_.config.validate();
        if (meshes.empty()) throw std::invalid_argument("pipeline: empty training cohort");
        state_.rng.seed(state_.config.seed);
        meshes_ = meshes;
        for (const auto& m : meshes_) graphs_.push_back(build_graph(m, state_.config.mode));

        state_.psi = make_feature_net(
            FeatureNetConfig{state_.config.mode, state_.config.d_z, state_.config.conv_widths,
                             state_.config.conv_heads},
            state_.rng);

        if (!state_.config.atlas_init.empty()) {
            if (static_cast<int>(state_.config.atlas_init.size()) != state_.config.clusters)
                throw std::invalid_argument("atlas_init count must equal cluster count");
            for (const auto& path : state_.config.atlas_init) init_paths_.push_back(path);
        } else {
            for (int idx : detail::pick_atlas_seeds(graphs_, state_.config.clusters))
                state_.atlases.push_back(make_atlas(meshes_[idx]));
        }
        for (const auto& a : state_.atlases)
            state_.generators.push_back(
                make_generator(a.size(), state_.config.gen_latent, state_.rng,
                               state_.config.gen_hidden));
        const int k = static_cast<int>(meshes_.size());
        const int m = state_.config.clusters;
        state_.weights.W = Mat::Constant(k, m, 1.0 / m);

        std::vector<ad::Var> params = state_.psi.parameters();
        for (auto& g : state_.generators)
            for (auto& p : g.parameters()) params.push_back(p);
        opt_ = std::make_unique<Adam>(std::move(params), state_.config.learning_rate);
    }

    // Deferred atlas-file loading hook for the CLI path.
    void load_initial_atlases(const std::vector<SurfaceMesh>& atlas_meshes) {
        state_.atlases.clear();
        state_.generators.clear();
        for (const auto& m : atlas_meshes) state_.atlases.push_back(make_atlas(m));
        for (const auto& a : state_.atlases)
            state_.generators.push_back(make_generator(
                a.size(), state_.config.gen_latent, state_.rng, state_.config.gen_hidden));
        std::vector<ad::Var> params = state_.psi.parameters();
        for (auto& g : state_.generators)
            for (auto& p : g.parameters()) params.push_back(p);
        opt_ = std::make_unique<Adam>(std::move(params), state_.config.learning_rate);
    }

    EpochLog train_epoch() {
        const TrainConfig& cfg = state_.config;
        const int K = static_cast<int>(graphs_.size());
        const int M = cfg.clusters;
        const double lam = cfg.effective_lambda();
        const int epoch = static_cast<int>(state_.log.size());
        const double beta =
            BetaSchedule{cfg.beta.start, cfg.beta.end,
                         cfg.beta.decay_steps > 0 ? cfg.beta.decay_steps : cfg.epochs}
                .at(epoch);

        opt_->zero_grad();
        std::normal_distribution<double> gauss(0.0, 1.0);

        // encode every atlas once per epoch graph
        std::vector<NodePosterior> atlas_post;
        for (const auto& a : state_.atlases) atlas_post.push_back(encode(atlas_feature_graph(a, cfg.mode), state_.psi));

        ad::Var l_psi = ad::scalar(0.0), l_ref = ad::scalar(0.0), l_g = ad::scalar(0.0);
        for (int k = 0; k < K; ++k) {
            const ShapeGraph& g = graphs_[k];
            NodePosterior post = encode(g, state_.psi);
            Mat eps(post.mean->val.rows(), post.mean->val.cols());
            for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = gauss(state_.rng);
            ad::Var z = reparameterize(post, eps);
            ad::Var x_rec = decode(z, g.adjacency, state_.psi);
            ad::Var lk = loss_feature(g, x_rec, post, cfg.mode, {cfg.w_kl, cfg.w_norm},
                                      &meshes_[k].faces);
            if (!std::isfinite(lk->val(0, 0)))
                throw std::runtime_error("non-finite feature loss at epoch " +
                                         std::to_string(epoch) + " shape " + std::to_string(k));
            l_psi = ad::add(l_psi, lk);

            ad::Var pos_k = ad::constant(Mat(g.positions()));
            for (int m = 0; m < M; ++m) {
                double w_km = state_.weights.W(k, m);
                ad::Var phi = attention_var(atlas_post[m].mean, post.mean, lam);
                ad::Var warped = warp_var(phi, pos_k);
                if (cfg.refinement) {
                    ad::Var lr = refinement_loss_var(pos_k, warped, state_.atlases[m].neighbors,
                                                     {cfg.w_cd, cfg.w_lap});
                    l_ref = ad::add(l_ref, ad::scale(lr, M == 1 ? 1.0 : w_km));
                }
                // the generator models normalized shapes as data: its loss
                // does not feed back into the matcher
                ad::Var x_norm = ad::constant(warped->val);
                LatentPosterior lat = gen_encode_var(x_norm, state_.generators[m]);
                Eigen::RowVectorXd geps(cfg.gen_latent);
                for (int i = 0; i < cfg.gen_latent; ++i) geps(i) = gauss(state_.rng);
                ad::Var grec = gen_decode_var(gen_reparameterize(lat, geps), state_.generators[m]);
                ad::Var lg = loss_generation(x_norm, grec, lat, beta);
                l_g = ad::add(l_g, ad::scale(lg, M == 1 ? 1.0 : w_km));
            }
        }
        ad::Var total = ad::add(ad::add(l_psi, l_ref), l_g);
        if (!std::isfinite(total->val(0, 0)))
            throw std::runtime_error("non-finite total loss at epoch " + std::to_string(epoch));
        ad::backward(total);
        opt_->step();

        EpochLog log;
        log.epoch = epoch;
        log.l_psi = l_psi->val(0, 0);
        log.l_ref = l_ref->val(0, 0);
        log.l_g = l_g->val(0, 0);
        log.atlas_displacement = refresh_atlases();
        state_.log.push_back(log);
        for (auto& g : state_.generators) g.trained = true;
        return log;
    }

    // End-of-epoch refresh: warp all training shapes with eps = 0, run one
    // closed-form sweep, then (multi-atlas) refresh distances and weights.
    double refresh_atlases() {
        const TrainConfig& cfg = state_.config;
        const double lam = cfg.effective_lambda();
        const int M = cfg.clusters;
        std::vector<std::vector<MatX3>> warped(M);
        for (int m = 0; m < M; ++m) {
            NodePosterior amu = encode(atlas_feature_graph(state_.atlases[m], cfg.mode), state_.psi);
            for (const auto& g : graphs_) {
                NodePosterior post = encode(g, state_.psi);
                ad::Var phi = attention_var(amu.mean, post.mean, lam);
                warped[m].push_back(warp_var(phi, ad::constant(Mat(g.positions())))->val);
            }
        }
        double disp = 0.0;
        if (M == 1) {
            Atlas next = update_atlas(warped[0], state_.atlases[0], cfg.atlas_gamma);
            disp = (next.positions - state_.atlases[0].positions).rowwise().norm().maxCoeff();
            state_.atlases[0] = std::move(next);
        } else {
            auto next = update_multi_atlas(state_.atlases, warped, state_.weights.W,
                                           cfg.atlas_gamma);
            for (int m = 0; m < M; ++m)
                disp = std::max(disp, (next[m].positions - state_.atlases[m].positions)
                                          .rowwise()
                                          .norm()
                                          .maxCoeff());
            state_.atlases = std::move(next);
            Mat d = distance_matrix(warped, state_.atlases);
            state_.weights = cluster_weights(d, default_alpha(d) * cfg.cluster_alpha_scale);
        }
        return disp;
    }

    void train() {
        for (int e = 0; e < state_.config.epochs; ++e) train_epoch();
    }

    // ---- evaluation helpers -------------------------------------------

    int best_cluster(const ShapeGraph& g) const {
        const double lam = state_.config.effective_lambda();
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        NodePosterior post = encode(g, state_.psi);
        for (int m = 0; m < state_.config.clusters; ++m) {
            NodePosterior amu = encode(atlas_feature_graph(state_.atlases[m], state_.config.mode), state_.psi);
            ad::Var phi = attention_var(amu.mean, post.mean, lam);
            MatX3 w = warp_var(phi, ad::constant(Mat(g.positions())))->val;
            double d = (w - state_.atlases[m].positions).rowwise().squaredNorm().sum() /
                       state_.atlases[m].size();
            if (d < best_d) {
                best_d = d;
                best = m;
            }
        }
        return best;
    }

    // Warp a shape onto its best atlas (matching / normalization step).
    NormalizedShape normalize_shape(const SurfaceMesh& mesh) const {
        ShapeGraph g = build_graph(mesh, state_.config.mode);
        int m = state_.config.clusters == 1 ? 0 : best_cluster(g);
        NodePosterior post = encode(g, state_.psi);
        NodePosterior amu = encode(atlas_feature_graph(state_.atlases[m], state_.config.mode), state_.psi);
        CorrespondenceMap map =
            compute_attention(amu.mean->val, post.mean->val, state_.config.effective_lambda());
        NormalizedShape out = warp(map, g, state_.atlases[m].adjacency);
        out.source_id = std::to_string(m);  // cluster id carried in source tag
        return out;
    }

    CorrespondenceMap correspondence(const SurfaceMesh& mesh, int cluster = 0) const {
        ShapeGraph g = build_graph(mesh, state_.config.mode);
        NodePosterior post = encode(g, state_.psi);
        NodePosterior amu =
            encode(atlas_feature_graph(state_.atlases[cluster], state_.config.mode), state_.psi);
        return compute_attention(amu.mean->val, post.mean->val,
                                 state_.config.effective_lambda());
    }

    // warp -> generator encode (mean) -> decode; the generalisation path
    MatX3 reconstruct(const SurfaceMesh& mesh) const {
        ShapeGraph g = build_graph(mesh, state_.config.mode);
        int m = state_.config.clusters == 1 ? 0 : best_cluster(g);
        NodePosterior post = encode(g, state_.psi);
        NodePosterior amu = encode(atlas_feature_graph(state_.atlases[m], state_.config.mode), state_.psi);
        ad::Var phi = attention_var(amu.mean, post.mean, state_.config.effective_lambda());
        ad::Var warped = warp_var(phi, ad::constant(Mat(g.positions())));
        LatentPosterior lat = gen_encode_var(warped, state_.generators[m]);
        return gen_decode_var(lat.mean, state_.generators[m])->val;
    }

    PipelineState& state() { return state_; }
    const PipelineState& state() const { return state_; }
    const std::vector<SurfaceMesh>& meshes() const { return meshes_; }
    const std::vector<ShapeGraph>& graphs() const { return graphs_; }

  private:
    PipelineState state_;
    std::vector<SurfaceMesh> meshes_;
    std::vector<ShapeGraph> graphs_;
    std::vector<std::string> init_paths_;
    std::unique_ptr<Adam> opt_;
};

// ---- checkpoint serialization ------------------------------------------

namespace detail {

inline void put_layer(std::map<std::string, ad::Mat>& t, const std::string& prefix,
                      const SpatialConvLayer& l) {
    for (int m = 0; m < l.heads(); ++m) {
        t[prefix + ".W" + std::to_string(m)] = l.W[m]->val;
        t[prefix + ".u" + std::to_string(m)] = l.u[m]->val;
        t[prefix + ".c" + std::to_string(m)] = l.c[m]->val;
    }
    t[prefix + ".b"] = l.b->val;
}

inline void get_layer(const std::map<std::string, ad::Mat>& t, const std::string& prefix,
                      SpatialConvLayer& l) {
    for (int m = 0; m < l.heads(); ++m) {
        l.W[m]->val = t.at(prefix + ".W" + std::to_string(m));
        l.u[m]->val = t.at(prefix + ".u" + std::to_string(m));
        l.c[m]->val = t.at(prefix + ".c" + std::to_string(m));
    }
    l.b->val = t.at(prefix + ".b");
}

}  // namespace detail

inline void save_pipeline(const std::string& path, const PipelineState& s, int epoch) {
    std::map<std::string, ad::Mat> t;
    for (std::size_t i = 0; i < s.psi.encoder.size(); ++i)
        detail::put_layer(t, "psi.enc" + std::to_string(i), s.psi.encoder[i]);
    detail::put_layer(t, "psi.mean", s.psi.head_mean);
    detail::put_layer(t, "psi.logvar", s.psi.head_log_var);
    t["psi.skip"] = s.psi.skip->val;
    for (std::size_t i = 0; i < s.psi.decoder.size(); ++i)
        detail::put_layer(t, "psi.dec" + std::to_string(i), s.psi.decoder[i]);
    for (std::size_t m = 0; m < s.generators.size(); ++m) {
        const auto& g = s.generators[m];
        for (std::size_t i = 0; i < g.encoder.size(); ++i) {
            t["gen" + std::to_string(m) + ".enc" + std::to_string(i) + ".W"] = g.encoder[i].W->val;
            t["gen" + std::to_string(m) + ".enc" + std::to_string(i) + ".b"] = g.encoder[i].b->val;
        }
        for (std::size_t i = 0; i < g.decoder.size(); ++i) {
            t["gen" + std::to_string(m) + ".dec" + std::to_string(i) + ".W"] = g.decoder[i].W->val;
            t["gen" + std::to_string(m) + ".dec" + std::to_string(i) + ".b"] = g.decoder[i].b->val;
        }
        t["atlas" + std::to_string(m) + ".positions"] = s.atlases[m].positions;
        t["atlas" + std::to_string(m) + ".reference"] = s.atlases[m].reference;
        t["atlas" + std::to_string(m) + ".adjacency"] = s.atlases[m].adjacency;
        Mat faces(s.atlases[m].faces.size(), 3);
        for (std::size_t f = 0; f < s.atlases[m].faces.size(); ++f)
            for (int c = 0; c < 3; ++c) faces(f, c) = s.atlases[m].faces[f][c];
        t["atlas" + std::to_string(m) + ".faces"] = faces;
    }
    t["cluster_weights"] = s.weights.W;

    nlohmann::json meta = {{"mode", to_string(s.config.mode)},
                           {"d_z", s.config.d_z},
                           {"conv_widths", s.config.conv_widths},
                           {"conv_heads", s.config.conv_heads},
                           {"gen_latent", s.config.gen_latent},
                           {"gen_hidden", s.config.gen_hidden},
                           {"clusters", s.config.clusters},
                           {"lambda", s.config.lambda},
                           {"epoch", epoch}};
    checkpoint::save(path, t, meta);
}

inline PipelineState load_pipeline(const std::string& path) {
    checkpoint::Archive arc = checkpoint::load(path);
    PipelineState s;
    s.config.mode = feature_mode_from_string(arc.metadata["mode"]);
    s.config.d_z = arc.metadata["d_z"];
    s.config.conv_widths = arc.metadata["conv_widths"].get<std::vector<int>>();
    s.config.conv_heads = arc.metadata["conv_heads"];
    s.config.gen_latent = arc.metadata["gen_latent"];
    s.config.gen_hidden = arc.metadata["gen_hidden"].get<std::vector<int>>();
    s.config.clusters = arc.metadata["clusters"];
    s.config.lambda = arc.metadata["lambda"];
    std::mt19937_64 rng(0);
    s.psi = make_feature_net(
        FeatureNetConfig{s.config.mode, s.config.d_z, s.config.conv_widths, s.config.conv_heads},
        rng);
    for (std::size_t i = 0; i < s.psi.encoder.size(); ++i)
        detail::get_layer(arc.tensors, "psi.enc" + std::to_string(i), s.psi.encoder[i]);
    detail::get_layer(arc.tensors, "psi.mean", s.psi.head_mean);
    detail::get_layer(arc.tensors, "psi.logvar", s.psi.head_log_var);
    s.psi.skip->val = arc.tensors.at("psi.skip");
    for (std::size_t i = 0; i < s.psi.decoder.size(); ++i)
        detail::get_layer(arc.tensors, "psi.dec" + std::to_string(i), s.psi.decoder[i]);
    for (int m = 0; m < s.config.clusters; ++m) {
        std::string am = "atlas" + std::to_string(m);
        SurfaceMesh mesh;
        mesh.vertices = arc.tensors.at(am + ".positions");
        const Mat& faces = arc.tensors.at(am + ".faces");
        for (Eigen::Index f = 0; f < faces.rows(); ++f)
            mesh.faces.push_back({static_cast<int>(faces(f, 0)), static_cast<int>(faces(f, 1)),
                                  static_cast<int>(faces(f, 2))});
        Atlas a = make_atlas(mesh);
        a.reference = arc.tensors.at(am + ".reference");
        s.atlases.push_back(std::move(a));
        GeneratorParams g = make_generator(s.atlases[m].size(), s.config.gen_latent, rng,
                                           s.config.gen_hidden);
        std::string gm = "gen" + std::to_string(m);
        for (std::size_t i = 0; i < g.encoder.size(); ++i) {
            g.encoder[i].W->val = arc.tensors.at(gm + ".enc" + std::to_string(i) + ".W");
            g.encoder[i].b->val = arc.tensors.at(gm + ".enc" + std::to_string(i) + ".b");
        }
        for (std::size_t i = 0; i < g.decoder.size(); ++i) {
            g.decoder[i].W->val = arc.tensors.at(gm + ".dec" + std::to_string(i) + ".W");
            g.decoder[i].b->val = arc.tensors.at(gm + ".dec" + std::to_string(i) + ".b");
        }
        g.trained = true;
        s.generators.push_back(std::move(g));
    }
    s.weights.W = arc.tensors.at("cluster_weights");
    return s;
}

}  // namespace asmg
