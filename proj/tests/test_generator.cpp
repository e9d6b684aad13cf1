#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "asmg/generator.hpp"
#include "asmg/optimizer.hpp"

using namespace asmg;
using Catch::Approx;

namespace {

Mat random_mat(int r, int c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = d(rng);
    return m;
}

}  // namespace

TEST_CASE("gen_encode / gen_decode shape contracts") {
    std::mt19937_64 rng(1);
    GeneratorParams p = make_generator(10, 4, rng, {8});
    Mat x = random_mat(10, 3, rng);
    LatentPosterior post = gen_encode_var(ad::constant(x), p);
    REQUIRE(post.mean->val.rows() == 1);
    REQUIRE(post.mean->val.cols() == 4);
    REQUIRE(post.log_var->val.cols() == 4);
    Mat rec = gen_decode_var(post.mean, p)->val;
    REQUIRE(rec.rows() == 10);
    REQUIRE(rec.cols() == 3);
    REQUIRE_THROWS_AS(gen_encode_var(ad::constant(random_mat(9, 3, rng)), p),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(gen_decode_var(ad::constant(random_mat(1, 5, rng)), p),
                      std::invalid_argument);
}

TEST_CASE("encoding is deterministic and eps = 0 returns the posterior mean") {
    std::mt19937_64 rng(2);
    GeneratorParams p = make_generator(6, 3, rng, {8});
    Mat x = random_mat(6, 3, rng);
    LatentPosterior a = gen_encode_var(ad::constant(x), p);
    LatentPosterior b = gen_encode_var(ad::constant(x), p);
    REQUIRE(a.mean->val == b.mean->val);
    REQUIRE(a.log_var->val == b.log_var->val);
    REQUIRE(gen_reparameterize(a, Eigen::RowVectorXd())->val == a.mean->val);
    REQUIRE(gen_reparameterize(a, Eigen::RowVectorXd::Zero(3))->val == a.mean->val);
}

TEST_CASE("flattening is row-major over atlas vertex order") {
    std::mt19937_64 rng(3);
    GeneratorParams p = make_generator(4, 2, rng, {});  // single dense layer each way
    Mat x = random_mat(4, 3, rng);
    // encoder input = [x00 x01 x02 x10 x11 x12 ...]
    Eigen::RowVectorXd flat(12);
    for (int i = 0; i < 4; ++i)
        for (int c = 0; c < 3; ++c) flat(3 * i + c) = x(i, c);
    Eigen::RowVectorXd h = flat * p.encoder[0].W->val + p.encoder[0].b->val;
    LatentPosterior post = gen_encode_var(ad::constant(x), p);
    REQUIRE((post.mean->val - h.leftCols(2)).norm() < 1e-12);
    REQUIRE((post.log_var->val - h.rightCols(2)).norm() < 1e-12);
}

TEST_CASE("loss_generation equals sum-squared error plus beta KL") {
    std::mt19937_64 rng(4);
    GeneratorParams p = make_generator(5, 3, rng, {6});
    Mat x = random_mat(5, 3, rng);
    ad::Var xv = ad::constant(x);
    LatentPosterior post = gen_encode_var(xv, p);
    ad::Var rec = gen_decode_var(post.mean, p);
    double beta = 0.37;
    double got = loss_generation(xv, rec, post, beta)->val(0, 0);
    double sse = (rec->val - x).squaredNorm();
    const Mat& mu = post.mean->val;
    const Mat& lv = post.log_var->val;
    double kl = 0.5 * (mu.array().square() + lv.array().exp() - 1.0 - lv.array()).sum();
    REQUIRE(got == Approx(sse + beta * kl).margin(1e-12));
    REQUIRE_THROWS_AS(loss_generation(xv, rec, post, -1e-9), std::invalid_argument);
}

TEST_CASE("weighted loss reduces to a plain weighted sum and skips zero weights") {
    std::mt19937_64 rng(5);
    GeneratorParams p = make_generator(4, 2, rng, {5});
    std::vector<Mat> shapes = {random_mat(4, 3, rng), random_mat(4, 3, rng),
                               random_mat(4, 3, rng)};
    double beta = 0.01;
    Eigen::VectorXd w(3);
    w << 0.2, 0.0, 0.8;
    double got = loss_generation_weighted(shapes, w, p, beta)->val(0, 0);
    double expect = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (w(k) == 0.0) continue;
        ad::Var x = ad::constant(shapes[k]);
        LatentPosterior post = gen_encode_var(x, p);
        ad::Var rec = gen_decode_var(post.mean, p);
        expect += w(k) * loss_generation(x, rec, post, beta)->val(0, 0);
    }
    REQUIRE(got == Approx(expect).margin(1e-12));
    // a zero-weight shape contributes no gradient either
    for (auto& leaf : p.parameters()) {
        leaf->ensure_grad();
        leaf->grad.setZero();
    }
    Eigen::VectorXd only_first = Eigen::VectorXd::Zero(3);
    only_first(0) = 1.0;
    ad::backward(loss_generation_weighted(shapes, only_first, p, beta));
    std::vector<Mat> grads_first;
    for (auto& leaf : p.parameters()) grads_first.push_back(leaf->grad);
    for (auto& leaf : p.parameters()) leaf->grad.setZero();
    shapes[1].setConstant(1e6);  // should be ignored entirely
    shapes[2].setConstant(-1e6);
    ad::backward(loss_generation_weighted(shapes, only_first, p, beta));
    std::size_t idx = 0;
    for (auto& leaf : p.parameters()) REQUIRE(leaf->grad == grads_first[idx++]);
    REQUIRE_THROWS_AS(loss_generation_weighted({}, Eigen::VectorXd(), p, beta),
                      std::invalid_argument);
}

TEST_CASE("analytic gradients of loss_generation match finite differences") {
    std::mt19937_64 rng(6);
    GeneratorParams p = make_generator(4, 2, rng, {5});
    Mat x = random_mat(4, 3, rng);
    auto eval = [&]() {
        ad::Var xv = ad::constant(x);
        LatentPosterior post = gen_encode_var(xv, p);
        ad::Var rec = gen_decode_var(post.mean, p);
        return loss_generation(xv, rec, post, 0.05);
    };
    ad::Var loss = eval();
    ad::backward(loss);
    double h = 1e-6;
    for (auto& leaf : p.parameters()) {
        leaf->ensure_grad();
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(leaf->val.size(), 4); ++i) {
            double orig = leaf->val(i);
            leaf->val(i) = orig + h;
            double hi = eval()->val(0, 0);
            leaf->val(i) = orig - h;
            double lo = eval()->val(0, 0);
            leaf->val(i) = orig;
            double fd = (hi - lo) / (2 * h);
            REQUIRE(std::abs(leaf->grad(i) - fd) / std::max(std::abs(fd), 1e-4) < 1e-4);
        }
    }
}

TEST_CASE("overfitting a single shape drives reconstruction error below 1e-3") {
    std::mt19937_64 rng(7);
    GeneratorParams p = make_generator(6, 4, rng, {16});
    Mat x = random_mat(6, 3, rng);
    Adam opt(p.parameters(), 1e-2);
    double sse = 1e9;
    for (int step = 0; step < 800; ++step) {
        opt.zero_grad();
        ad::Var xv = ad::constant(x);
        LatentPosterior post = gen_encode_var(xv, p);
        ad::Var rec = gen_decode_var(post.mean, p);
        sse = (rec->val - x).squaredNorm();
        if (sse < 5e-4) break;
        ad::backward(loss_generation(xv, rec, post, 1e-5));
        opt.step();
    }
    REQUIRE(sse < 1e-3);
}

TEST_CASE("beta schedule interpolates log-linearly between its endpoints") {
    BetaSchedule s{2e-3, 2e-6, 100};
    REQUIRE(s.at(0) == Approx(2e-3));
    REQUIRE(s.at(100) == Approx(2e-6));
    REQUIRE(s.at(1000) == Approx(2e-6));
    REQUIRE(s.at(50) == Approx(std::sqrt(2e-3 * 2e-6)));
    // monotone decreasing when start > end
    double prev = s.at(0);
    for (int t = 1; t <= 100; ++t) {
        REQUIRE(s.at(t) <= prev + 1e-18);
        prev = s.at(t);
    }
    // increasing schedules are allowed too
    BetaSchedule up{1e-3, 2e-3, 10};
    REQUIRE(up.at(0) < up.at(5));
    REQUIRE(up.at(5) < up.at(10));
    BetaSchedule bad{0.0, 1e-3, 10};
    REQUIRE_THROWS_AS(bad.at(0), std::invalid_argument);
}

TEST_CASE("sampling requires trained generators and is deterministic per seed") {
    std::mt19937_64 rng(8);
    GeneratorParams p = make_generator(5, 3, rng, {6});
    REQUIRE_THROWS_AS(sample_population({&p}, 3, 42), std::invalid_argument);
    p.trained = true;
    auto a = sample_population({&p}, 4, 42);
    auto b = sample_population({&p}, 4, 42);
    auto c = sample_population({&p}, 4, 43);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        REQUIRE(a[i].positions == b[i].positions);
        REQUIRE(a[i].latent == b[i].latent);
        REQUIRE(a[i].cluster == 0);
    }
    bool differs = false;
    for (std::size_t i = 0; i < 4; ++i) differs = differs || a[i].latent != c[i].latent;
    REQUIRE(differs);
    REQUIRE(sample_population({&p}, 0, 1).empty());
}

TEST_CASE("decoded samples match decoding the drawn latents") {
    std::mt19937_64 rng(9);
    GeneratorParams p = make_generator(4, 2, rng, {5});
    p.trained = true;
    for (const auto& s : sample_population({&p}, 6, 7))
        REQUIRE((s.positions - gen_decode(s.latent, p)).norm() == 0.0);
}

TEST_CASE("cluster frequencies follow the prior") {
    std::mt19937_64 rng(10);
    GeneratorParams p0 = make_generator(4, 2, rng, {});
    GeneratorParams p1 = make_generator(4, 2, rng, {});
    p0.trained = p1.trained = true;
    Eigen::VectorXd prior(2);
    prior << 3.0, 1.0;  // normalizes to 0.75 / 0.25
    const int n = 100000;
    auto samples = sample_population({&p0, &p1}, n, 99, prior);
    int first = 0;
    for (const auto& s : samples) first += s.cluster == 0 ? 1 : 0;
    double frac = static_cast<double>(first) / n;
    REQUIRE(frac == Approx(0.75).margin(0.005));
}

TEST_CASE("sampled latents look standard normal") {
    std::mt19937_64 rng(11);
    GeneratorParams p = make_generator(3, 4, rng, {});
    p.trained = true;
    const int n = 20000;
    auto samples = sample_population({&p}, n, 5);
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(4);
    for (const auto& s : samples) mean += s.latent;
    mean /= n;
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(4);
    for (const auto& s : samples) var += (s.latent - mean).array().square().matrix();
    var /= n - 1;
    for (int l = 0; l < 4; ++l) {
        REQUIRE(std::abs(mean(l)) < 3.0 / std::sqrt(static_cast<double>(n)) + 0.01);
        REQUIRE(var(l) == Approx(1.0).margin(0.05));
    }
}
