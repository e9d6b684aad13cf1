#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "asmg/mesh_io.hpp"
#include "asmg/phi_io.hpp"
#include "asmg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace asmg;

namespace {

nlohmann::json read_json_file(const std::string& path) {
    if (!fs::exists(path)) throw std::invalid_argument("no such file: " + path);
    std::ifstream in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("cannot parse " + path + ": " + e.what());
    }
    return j;
}

std::vector<std::string> list_mesh_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw std::invalid_argument("no such directory: " + dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string ext = e.path().extension().string();
        if (ext == ".obj" || ext == ".off" || ext == ".ply") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("no mesh files (.obj/.off/.ply) in " + dir);
    return files;
}

std::vector<SurfaceMesh> load_cohort(const std::vector<std::string>& files) {
    std::vector<SurfaceMesh> meshes;
    for (const auto& f : files) meshes.push_back(load_mesh(f));
    return meshes;
}

// ---- trained-state inference helpers (mirror Pipeline's evaluation path) --

Mat atlas_embedding(const PipelineState& s, int m) {
    return encode(atlas_feature_graph(s.atlases[m], s.config.mode), s.psi).mean->val;
}

MatX3 warp_onto(const PipelineState& s, const ShapeGraph& g, int m) {
    Mat z_k = encode(g, s.psi).mean->val;
    CorrespondenceMap map =
        compute_attention(atlas_embedding(s, m), z_k, s.config.effective_lambda());
    return map.phi * g.positions();
}

int best_cluster(const PipelineState& s, const ShapeGraph& g) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < s.config.clusters; ++m) {
        MatX3 w = warp_onto(s, g, m);
        double d = (w - s.atlases[m].positions).rowwise().squaredNorm().sum() /
                   s.atlases[m].size();
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

MatX3 reconstruct(const PipelineState& s, const SurfaceMesh& mesh) {
    ShapeGraph g = build_graph(mesh, s.config.mode);
    int m = s.config.clusters == 1 ? 0 : best_cluster(s, g);
    ad::Var warped = ad::constant(Mat(warp_onto(s, g, m)));
    LatentPosterior lat = gen_encode_var(warped, s.generators[m]);
    return gen_decode_var(lat.mean, s.generators[m])->val;
}

void write_weights_csv(const std::string& path, const Mat& W) {
    std::ofstream out(path);
    out << "shape";
    for (Eigen::Index m = 0; m < W.cols(); ++m) out << ",w" << m;
    out << "\n";
    out.precision(17);
    for (Eigen::Index k = 0; k < W.rows(); ++k) {
        out << k;
        for (Eigen::Index m = 0; m < W.cols(); ++m) out << "," << W(k, m);
        out << "\n";
    }
}

// ---- minimal PPM plotting -------------------------------------------------

struct Canvas {
    int w, h;
    std::vector<std::array<unsigned char, 3>> px;
    Canvas(int w_, int h_) : w(w_), h(h_), px(w_ * h_, {255, 255, 255}) {}
    void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        px[y * w + x] = {r, g, b};
    }
    void rect(int x0, int y0, int x1, int y1, unsigned char r, unsigned char g,
              unsigned char b) {
        for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
            for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, r, g, b);
    }
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        out << "P6\n" << w << " " << h << "\n255\n";
        for (const auto& p : px) out.write(reinterpret_cast<const char*>(p.data()), 3);
        if (!out) throw std::runtime_error("cannot write " + path);
    }
};

// Overlaid histograms: first series red, second blue (purple where mixed).
void plot_histogram(const std::string& path, const std::vector<double>& a,
                    const std::vector<double>& b) {
    const int bins = 32, W = 480, H = 320, margin = 20;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* s : {&a, &b})
        for (double v : *s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi <= lo) hi = lo + 1.0;
    auto counts = [&](const std::vector<double>& s) {
        std::vector<double> c(bins, 0.0);
        for (double v : s) {
            int i = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
            c[i] += 1.0 / s.size();  // normalized so cohort sizes are comparable
        }
        return c;
    };
    auto ca = counts(a), cb = counts(b);
    double peak = 1e-12;
    for (int i = 0; i < bins; ++i) peak = std::max({peak, ca[i], cb[i]});
    Canvas img(W, H);
    int bw = (W - 2 * margin) / bins;
    for (int i = 0; i < bins; ++i) {
        int x0 = margin + i * bw;
        int ha = static_cast<int>(ca[i] / peak * (H - 2 * margin));
        int hb = static_cast<int>(cb[i] / peak * (H - 2 * margin));
        for (int y = 0; y < std::max(ha, hb); ++y) {
            bool in_a = y < ha, in_b = y < hb;
            unsigned char r = in_a ? 200 : 120, g = 60, bl = in_b ? 200 : 120;
            if (in_a != in_b) {
                r = in_a ? 220 : 60;
                bl = in_b ? 220 : 60;
            }
            for (int x = x0; x < x0 + bw - 1; ++x) img.set(x, H - margin - 1 - y, r, g, bl);
        }
    }
    img.rect(margin, H - margin, W - margin, H - margin, 0, 0, 0);  // axis
    img.save(path);
}

// Box-style summary per metric: min/max whisker, mean +- stddev box.
void plot_box_summary(const std::string& path,
                      const std::vector<std::pair<std::string, MetricSummary>>& rows) {
    const int W = 480, H = 90 * static_cast<int>(rows.size()) + 30;
    Canvas img(W, H);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MetricSummary& s = rows[i].second;
        double lo = *std::min_element(s.values.begin(), s.values.end());
        double hi = *std::max_element(s.values.begin(), s.values.end());
        double span = hi > lo ? hi - lo : 1.0;
        auto px = [&](double v) { return 30 + static_cast<int>((v - lo) / span * (W - 60)); };
        int yc = 30 + 90 * static_cast<int>(i) + 25;
        img.rect(px(lo), yc, px(hi), yc, 0, 0, 0);
        img.rect(px(std::max(lo, s.mean - s.stddev)), yc - 18,
                 px(std::min(hi, s.mean + s.stddev)), yc + 18, 150, 150, 230);
        img.rect(px(s.mean), yc - 22, px(s.mean), yc + 22, 180, 40, 40);
        img.rect(px(lo), yc - 10, px(lo), yc + 10, 0, 0, 0);
        img.rect(px(hi), yc - 10, px(hi), yc + 10, 0, 0, 0);
    }
    img.save(path);
}

// ---- subcommands ----------------------------------------------------------

struct GenArgs {
    std::string family = "bumpy-sphere", out_dir;
    int count = 10, n_lo = 80, n_hi = 200;
    double amplitude = 0.2;
    std::uint64_t seed = 0;
};

int cmd_generate_data(const GenArgs& a) {
    PopulationSpec spec;
    spec.family = family_from_string(a.family);
    spec.count = a.count;
    spec.n_lo = a.n_lo;
    spec.n_hi = a.n_hi;
    spec.amplitude = a.amplitude;
    spec.seed = a.seed;
    Cohort cohort = generate_population(spec);
    fs::create_directories(a.out_dir);
    nlohmann::json manifest;
    manifest["spec"] = {{"family", a.family},       {"count", a.count},
                        {"n_lo", a.n_lo},           {"n_hi", a.n_hi},
                        {"amplitude", a.amplitude}, {"seed", a.seed}};
    for (const auto& s : cohort.shapes) {
        std::string file = s.id + ".obj";
        save_mesh((fs::path(a.out_dir) / file).string(), s.mesh);
        manifest["shapes"].push_back({{"id", s.id},
                                      {"file", file},
                                      {"vertices", s.mesh.vertex_count()},
                                      {"label", s.truth.label}});
    }
    std::ofstream((fs::path(a.out_dir) / "cohort.json").string())
        << manifest.dump(2) << "\n";
    std::cout << "wrote " << cohort.shapes.size() << " meshes to " << a.out_dir << "\n";
    return 0;
}

struct TrainArgs {
    std::string config, data, out_dir = ".";
};

Pipeline make_pipeline(const TrainConfig& cfg, const std::vector<SurfaceMesh>& meshes) {
    Pipeline p(cfg, meshes);
    if (!cfg.atlas_init.empty()) {
        std::vector<SurfaceMesh> init;
        for (const auto& f : cfg.atlas_init) {
            if (!fs::exists(f)) throw std::invalid_argument("atlas_init: no such file: " + f);
            init.push_back(load_mesh(f));
        }
        p.load_initial_atlases(init);
    }
    return p;
}

void write_artifacts(const std::string& out_dir, const Pipeline& p, int epoch) {
    const PipelineState& s = p.state();
    save_pipeline((fs::path(out_dir) / "model.ckpt").string(), s, epoch);
    for (std::size_t m = 0; m < s.atlases.size(); ++m)
        save_mesh((fs::path(out_dir) / ("atlas_" + std::to_string(m) + ".obj")).string(),
                  s.atlases[m].mesh());
    write_weights_csv((fs::path(out_dir) / "weights.csv").string(), s.weights.W);
}

int cmd_train(const TrainArgs& a) {
    TrainConfig cfg = parse_train_config(read_json_file(a.config));
    std::string data = a.data.empty() ? cfg.dataset : a.data;
    if (data.empty())
        throw std::invalid_argument("no dataset: pass --data or set \"dataset\" in the config");
    auto meshes = load_cohort(list_mesh_files(data));
    fs::create_directories(a.out_dir);
    Pipeline p = make_pipeline(cfg, meshes);
    std::ofstream log((fs::path(a.out_dir) / "loss_log.csv").string());
    log << "epoch,l_psi,l_ref,l_g,atlas_displacement\n";
    log.precision(17);
    for (int e = 0; e < cfg.epochs; ++e) {
        EpochLog l = p.train_epoch();
        log << l.epoch << "," << l.l_psi << "," << l.l_ref << "," << l.l_g << ","
            << l.atlas_displacement << "\n";
        log.flush();
        if (cfg.checkpoint_every > 0 && (e + 1) % cfg.checkpoint_every == 0 &&
            e + 1 < cfg.epochs)
            save_pipeline(
                (fs::path(a.out_dir) / ("model_epoch" + std::to_string(e + 1) + ".ckpt"))
                    .string(),
                p.state(), e + 1);
    }
    write_artifacts(a.out_dir, p, cfg.epochs);
    std::cout << "trained " << cfg.epochs << " epochs on " << meshes.size()
              << " shapes; artifacts in " << a.out_dir << "\n";
    return 0;
}

struct MatchArgs {
    std::string checkpoint, out_dir = ".";
    std::vector<std::string> meshes;
    bool save_phi_flag = false;
};

int cmd_match(const MatchArgs& a) {
    if (!fs::exists(a.checkpoint))
        throw std::invalid_argument("no such file: " + a.checkpoint);
    PipelineState s = load_pipeline(a.checkpoint);
    fs::create_directories(a.out_dir);
    for (const auto& f : a.meshes) {
        if (!fs::exists(f)) throw std::invalid_argument("no such file: " + f);
        SurfaceMesh mesh = load_mesh(f);
        ShapeGraph g = build_graph(mesh, s.config.mode);
        int m = s.config.clusters == 1 ? 0 : best_cluster(s, g);
        Mat z_k = encode(g, s.psi).mean->val;
        CorrespondenceMap map =
            compute_attention(atlas_embedding(s, m), z_k, s.config.effective_lambda());
        SurfaceMesh warped{map.phi * g.positions(), s.atlases[m].faces};
        std::string stem = fs::path(f).stem().string();
        save_mesh((fs::path(a.out_dir) / (stem + "_normalized.obj")).string(), warped);
        if (a.save_phi_flag)
            save_phi((fs::path(a.out_dir) / (stem + ".phi")).string(), map);
    }
    std::cout << "matched " << a.meshes.size() << " shapes into " << a.out_dir << "\n";
    return 0;
}

int cmd_build_atlas(const TrainArgs& a) {
    TrainConfig cfg = parse_train_config(read_json_file(a.config));
    std::string data = a.data.empty() ? cfg.dataset : a.data;
    if (data.empty())
        throw std::invalid_argument("no dataset: pass --data or set \"dataset\" in the config");
    auto meshes = load_cohort(list_mesh_files(data));
    fs::create_directories(a.out_dir);
    Pipeline p = make_pipeline(cfg, meshes);
    p.train();
    const PipelineState& s = p.state();

    // converge the sweeps on the final warps and record the stopping state
    const int M = cfg.clusters;
    std::vector<std::vector<MatX3>> warped(M);
    for (int m = 0; m < M; ++m)
        for (const auto& g : p.graphs()) warped[m].push_back(warp_onto(s, g, m));
    std::vector<Atlas> atlases = s.atlases;
    std::vector<double> gammas;
    for (const auto& at : atlases)
        gammas.push_back(cfg.atlas_gamma >= 0 ? cfg.atlas_gamma : gamma_rule(at));
    int sweeps = 0;
    const double tol = 1e-9;
    for (; sweeps < 10000; ++sweeps) {
        std::vector<Atlas> next =
            M == 1 ? std::vector<Atlas>{update_atlas(warped[0], atlases[0], gammas[0])}
                   : update_multi_atlas(atlases, warped, s.weights.W, cfg.atlas_gamma);
        double disp = 0.0;
        for (int m = 0; m < M; ++m)
            disp = std::max(
                disp, (next[m].positions - atlases[m].positions).rowwise().norm().maxCoeff());
        atlases = std::move(next);
        if (disp < tol) break;
    }
    double objective =
        M == 1 ? atlas_objective(warped[0], atlases[0].positions, atlases[0].adjacency,
                                 gammas[0])
               : multi_atlas_objective(atlases, warped, s.weights.W, gammas);

    nlohmann::json side;
    for (int m = 0; m < M; ++m) {
        std::string file = "atlas_" + std::to_string(m) + ".obj";
        save_mesh((fs::path(a.out_dir) / file).string(), atlases[m].mesh());
        side["atlases"].push_back(
            {{"file", file}, {"gamma", gammas[m]}, {"vertices", atlases[m].size()}});
    }
    side["sweeps"] = sweeps + 1;
    side["objective"] = objective;
    std::ofstream((fs::path(a.out_dir) / "atlas.json").string()) << side.dump(2) << "\n";
    write_weights_csv((fs::path(a.out_dir) / "weights.csv").string(), s.weights.W);
    save_pipeline((fs::path(a.out_dir) / "model.ckpt").string(), s, cfg.epochs);
    std::cout << "built " << M << " atlas(es) in " << a.out_dir << "\n";
    return 0;
}

struct SynthArgs {
    std::string checkpoint, out_dir = ".";
    int count = 10;
    std::uint64_t seed = 0;
};

int cmd_synthesize(const SynthArgs& a) {
    if (!fs::exists(a.checkpoint))
        throw std::invalid_argument("no such file: " + a.checkpoint);
    PipelineState s = load_pipeline(a.checkpoint);
    fs::create_directories(a.out_dir);
    std::vector<const GeneratorParams*> gens;
    for (const auto& g : s.generators) gens.push_back(&g);
    auto samples = sample_population(gens, a.count, a.seed);
    nlohmann::json manifest;
    manifest["seed"] = a.seed;
    manifest["count"] = a.count;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& sm = samples[i];
        std::string file = "sample_" + std::to_string(i) + ".obj";
        save_mesh((fs::path(a.out_dir) / file).string(),
                  SurfaceMesh{sm.positions, s.atlases[sm.cluster].faces});
        std::vector<double> lat(sm.latent.data(), sm.latent.data() + sm.latent.size());
        manifest["samples"].push_back(
            {{"id", i}, {"file", file}, {"cluster", sm.cluster}, {"latent", lat}});
    }
    std::ofstream((fs::path(a.out_dir) / "manifest.json").string())
        << manifest.dump(2) << "\n";
    std::cout << "synthesized " << a.count << " meshes into " << a.out_dir << "\n";
    return 0;
}

struct ClusterArgs {
    std::string checkpoint, data, out_dir = ".";
};

int cmd_cluster(const ClusterArgs& a) {
    if (!fs::exists(a.checkpoint))
        throw std::invalid_argument("no such file: " + a.checkpoint);
    PipelineState s = load_pipeline(a.checkpoint);
    auto files = list_mesh_files(a.data);
    auto meshes = load_cohort(files);
    fs::create_directories(a.out_dir);
    const int M = s.config.clusters;
    std::vector<std::vector<MatX3>> warped(M);
    for (const auto& mesh : meshes) {
        ShapeGraph g = build_graph(mesh, s.config.mode);
        for (int m = 0; m < M; ++m) warped[m].push_back(warp_onto(s, g, m));
    }
    Mat d = distance_matrix(warped, s.atlases);
    ClusterWeights cw = cluster_weights(d);
    write_weights_csv((fs::path(a.out_dir) / "weights.csv").string(), cw.W);
    std::ofstream labels((fs::path(a.out_dir) / "labels.csv").string());
    labels << "shape,file,label\n";
    for (std::size_t k = 0; k < meshes.size(); ++k) {
        Eigen::Index best;
        cw.W.row(static_cast<Eigen::Index>(k)).maxCoeff(&best);
        labels << k << "," << fs::path(files[k]).filename().string() << "," << best << "\n";
    }
    std::cout << "clustered " << meshes.size() << " shapes into " << M << " groups\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint, data, out_dir = ".";
    int count = 200;
    std::uint64_t seed = 0;
};

int cmd_evaluate(const EvalArgs& a) {
    if (!fs::exists(a.checkpoint))
        throw std::invalid_argument("no such file: " + a.checkpoint);
    PipelineState s = load_pipeline(a.checkpoint);
    auto files = list_mesh_files(a.data);
    auto meshes = load_cohort(files);
    fs::create_directories(a.out_dir);

    std::vector<double> cd, hd, vol_real;
    std::vector<MatX3> real_pts;
    std::ofstream per_shape((fs::path(a.out_dir) / "per_shape.csv").string());
    per_shape << "shape,file,vertices,cd,hd,volume\n";
    for (std::size_t k = 0; k < meshes.size(); ++k) {
        MatX3 rec = reconstruct(s, meshes[k]);
        cd.push_back(chamfer_distance(rec, meshes[k].vertices));
        hd.push_back(hausdorff_distance(rec, meshes[k].vertices));
        vol_real.push_back(mesh_volume(meshes[k]));
        real_pts.push_back(meshes[k].vertices);
        per_shape << k << "," << fs::path(files[k]).filename().string() << ","
                  << meshes[k].vertex_count() << "," << cd.back() << "," << hd.back() << ","
                  << vol_real.back() << "\n";
    }

    std::vector<const GeneratorParams*> gens;
    for (const auto& g : s.generators) gens.push_back(&g);
    auto samples = sample_population(gens, a.count, a.seed);
    std::vector<double> vol_virt;
    std::vector<MatX3> virt_pts;
    for (const auto& sm : samples) {
        vol_virt.push_back(mesh_volume(SurfaceMesh{sm.positions, s.atlases[sm.cluster].faces}));
        virt_pts.push_back(sm.positions);
    }

    MetricSummary cd_sum = summarize(cd), hd_sum = summarize(hd);
    MetricSummary spec_hd = specificity(virt_pts, real_pts, DistanceMetric::HD);
    AcceptanceReport rates = acceptance_rates(vol_real, vol_virt);
    BiomarkerStats vol_stats = biomarker_stats(vol_real);
    auto [cheb_lo, cheb_hi] = chebyshev_interval(vol_stats);

    nlohmann::json metrics = {
        {"generalisation", {{"cd_mean", cd_sum.mean}, {"cd_std", cd_sum.stddev},
                            {"hd_mean", hd_sum.mean}, {"hd_std", hd_sum.stddev}}},
        {"specificity", {{"hd_mean", spec_hd.mean}, {"hd_std", spec_hd.stddev}}},
        {"volume",
         {{"real",
           {{"min", vol_stats.min}, {"max", vol_stats.max}, {"mean", vol_stats.mean},
            {"stddev", vol_stats.stddev}, {"mode", vol_stats.mode}}},
          {"virtual", {{"mean", summarize(vol_virt).mean},
                       {"stddev", summarize(vol_virt).stddev}}},
          {"chebyshev_interval", {cheb_lo, cheb_hi}}}},
        {"acceptance_rates", {{"a_minmax", rates.a_minmax},
                              {"a_chebyshev", rates.a_chebyshev},
                              {"a_normal", rates.a_normal}}},
        {"samples", a.count},
        {"seed", a.seed}};
    std::ofstream((fs::path(a.out_dir) / "metrics.json").string())
        << metrics.dump(2) << "\n";

    plot_histogram((fs::path(a.out_dir) / "volume_hist.ppm").string(), vol_real, vol_virt);
    plot_box_summary((fs::path(a.out_dir) / "metrics_box.ppm").string(),
                     {{"cd", cd_sum}, {"hd", hd_sum}, {"spec_hd", spec_hd}});
    std::cout << "evaluated " << meshes.size() << " shapes + " << a.count
              << " samples; reports in " << a.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-based shape matching, atlas building, and generation"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cgen = app.add_subcommand("generate-data", "write a synthetic mesh cohort");
    cgen->add_option("--family", gen.family, "ellipsoid | bumpy-sphere | bimodal");
    cgen->add_option("--count", gen.count);
    cgen->add_option("--n-lo", gen.n_lo, "min vertex count");
    cgen->add_option("--n-hi", gen.n_hi, "max vertex count");
    cgen->add_option("--amplitude", gen.amplitude);
    cgen->add_option("--seed", gen.seed);
    cgen->add_option("--out-dir", gen.out_dir)->required();

    TrainArgs tr;
    auto* ctr = app.add_subcommand("train", "train the matcher, atlas, and generator");
    ctr->add_option("--config", tr.config, "JSON config file")->required();
    ctr->add_option("--data", tr.data, "cohort directory (overrides config)");
    ctr->add_option("--out-dir", tr.out_dir);

    MatchArgs ma;
    auto* cma = app.add_subcommand("match", "warp shapes onto the trained atlas");
    cma->add_option("--checkpoint", ma.checkpoint)->required();
    cma->add_option("--out-dir", ma.out_dir);
    cma->add_flag("--save-phi", ma.save_phi_flag, "also write dense correspondence maps");
    cma->add_option("meshes", ma.meshes, "input mesh files")->required();

    TrainArgs ba;
    auto* cba = app.add_subcommand("build-atlas", "train and emit converged atlas artifacts");
    cba->add_option("--config", ba.config, "JSON config file")->required();
    cba->add_option("--data", ba.data, "cohort directory (overrides config)");
    cba->add_option("--out-dir", ba.out_dir);

    SynthArgs sy;
    auto* csy = app.add_subcommand("synthesize", "sample virtual shapes from the generator");
    csy->add_option("--checkpoint", sy.checkpoint)->required();
    csy->add_option("--count", sy.count);
    csy->add_option("--seed", sy.seed);
    csy->add_option("--out-dir", sy.out_dir);

    ClusterArgs cl;
    auto* ccl = app.add_subcommand("cluster", "assign shapes to atlas clusters");
    ccl->add_option("--checkpoint", cl.checkpoint)->required();
    ccl->add_option("--data", cl.data, "cohort directory")->required();
    ccl->add_option("--out-dir", cl.out_dir);

    EvalArgs ev;
    auto* cev = app.add_subcommand("evaluate", "generalisation/specificity/acceptance report");
    cev->add_option("--checkpoint", ev.checkpoint)->required();
    cev->add_option("--data", ev.data, "cohort directory")->required();
    cev->add_option("--count", ev.count, "virtual cohort size");
    cev->add_option("--seed", ev.seed);
    cev->add_option("--out-dir", ev.out_dir);

    try {
        app.parse(argc, argv);
        if (cgen->parsed()) return cmd_generate_data(gen);
        if (ctr->parsed()) return cmd_train(tr);
        if (cma->parsed()) return cmd_match(ma);
        if (cba->parsed()) return cmd_build_atlas(ba);
        if (csy->parsed()) return cmd_synthesize(sy);
        if (ccl->parsed()) return cmd_cluster(cl);
        if (cev->parsed()) return cmd_evaluate(ev);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
