#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "asmg/metrics.hpp"
#include "asmg/synth.hpp"
#include "test_helpers.hpp"

using namespace asmg;
using Catch::Approx;

TEST_CASE("summarize computes population mean and std") {
    MetricSummary s = summarize({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
    REQUIRE(s.mean == Approx(5.0));
    REQUIRE(s.stddev == Approx(2.0));
    REQUIRE_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("generalisation of a perfect reconstructor is zero") {
    std::vector<SurfaceMesh> held_out = {test::regular_tetrahedron(), test::unit_cube()};
    auto identity = [](const SurfaceMesh& m) { return MatX3(m.vertices); };
    for (DistanceMetric metric : {DistanceMetric::CD, DistanceMetric::HD}) {
        MetricSummary s = generalisation(identity, held_out, metric);
        REQUIRE(s.values.size() == 2);
        REQUIRE(s.mean == Approx(0.0).margin(1e-15));
    }
    REQUIRE_THROWS_AS(generalisation(identity, {}, DistanceMetric::CD), std::invalid_argument);
}

TEST_CASE("generalisation matches per-shape distances of the supplied reconstructor") {
    std::mt19937_64 rng(1);
    std::vector<SurfaceMesh> held_out = {test::regular_tetrahedron(), test::unit_cube()};
    auto shrink = [](const SurfaceMesh& m) { return MatX3(0.9 * m.vertices); };
    MetricSummary s = generalisation(shrink, held_out, DistanceMetric::HD);
    for (std::size_t i = 0; i < held_out.size(); ++i) {
        double expect = hausdorff_distance(MatX3(0.9 * held_out[i].vertices),
                                           MatX3(held_out[i].vertices));
        REQUIRE(s.values[i] == Approx(expect));
    }
}

TEST_CASE("specificity picks the nearest real shape") {
    std::mt19937_64 rng(2);
    MatX3 a = test::random_points(6, rng);
    MatX3 b = test::random_points(6, rng);
    MatX3 probe = a;
    probe.array() += 0.01;  // much closer to a than to b
    MetricSummary s = specificity({probe}, {a, b}, DistanceMetric::CD);
    REQUIRE(s.values.size() == 1);
    REQUIRE(s.values[0] == Approx(chamfer_distance(probe, a)));
    // a virtual shape equal to a real one scores zero
    MetricSummary zero = specificity({a}, {a, b}, DistanceMetric::HD);
    REQUIRE(zero.mean == Approx(0.0).margin(1e-15));
    REQUIRE_THROWS_AS(specificity({}, {a}, DistanceMetric::CD), std::invalid_argument);
    REQUIRE_THROWS_AS(specificity({a}, {}, DistanceMetric::CD), std::invalid_argument);
}

TEST_CASE("specificity never increases when the real cohort grows") {
    std::mt19937_64 rng(3);
    std::vector<MatX3> virt, real;
    for (int i = 0; i < 5; ++i) virt.push_back(test::random_points(8, rng));
    for (int i = 0; i < 3; ++i) real.push_back(test::random_points(8, rng));
    MetricSummary small = specificity(virt, real, DistanceMetric::CD);
    real.push_back(test::random_points(8, rng));
    real.push_back(virt[2]);
    MetricSummary big = specificity(virt, real, DistanceMetric::CD);
    for (std::size_t i = 0; i < virt.size(); ++i)
        REQUIRE(big.values[i] <= small.values[i] + 1e-15);
}

TEST_CASE("half-sample mode finds the densest region") {
    REQUIRE(half_sample_mode({5.0}) == Approx(5.0));
    REQUIRE(half_sample_mode({1.0, 3.0}) == Approx(2.0));
    // dense cluster at ~10, outliers far away
    std::vector<double> v = {0.0, 9.9, 10.0, 10.05, 10.1, 40.0};
    double mode = half_sample_mode(v);
    REQUIRE(mode > 9.5);
    REQUIRE(mode < 10.5);
    // symmetric data: mode near the center
    REQUIRE(half_sample_mode({1.0, 2.0, 3.0}) == Approx(2.0));
    REQUIRE_THROWS_AS(half_sample_mode({}), std::invalid_argument);
}

TEST_CASE("half-sample mode tracks the main peak of a bimodal sample") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> major(0.0, 0.5), minor(8.0, 0.5);
    std::vector<double> v;
    for (int i = 0; i < 700; ++i) v.push_back(major(rng));
    for (int i = 0; i < 300; ++i) v.push_back(minor(rng));
    REQUIRE(std::abs(half_sample_mode(v)) < 0.5);
}

TEST_CASE("biomarker stats and the Chebyshev interval follow their formulas") {
    std::vector<double> v = {1.0, 2.0, 2.0, 3.0, 10.0};
    BiomarkerStats s = biomarker_stats(v);
    REQUIRE(s.min == 1.0);
    REQUIRE(s.max == 10.0);
    REQUIRE(s.mean == Approx(3.6));
    MetricSummary m = summarize(v);
    REQUIRE(s.stddev == Approx(m.stddev));
    auto [lo, hi] = chebyshev_interval(s);
    double b = std::sqrt(s.stddev * s.stddev + (s.mode - s.mean) * (s.mode - s.mean));
    REQUIRE(lo == Approx(s.mode - 3 * b));
    REQUIRE(hi == Approx(s.mode + 3 * b));
    REQUIRE(hi - lo == Approx(6 * b));
}

TEST_CASE("acceptance rates on hand-built values") {
    std::vector<double> real = {0.0, 1.0, 2.0, 3.0, 4.0};
    // inside [0,4]: 1 and 3.5; outside: -1 and 9
    std::vector<double> virt = {1.0, 3.5, -1.0, 9.0};
    AcceptanceReport rep = acceptance_rates(real, virt);
    REQUIRE(rep.a_minmax == Approx(50.0));
    // identical populations are fully accepted by the range criterion
    AcceptanceReport all = acceptance_rates(real, real);
    REQUIRE(all.a_minmax == Approx(100.0));
    REQUIRE(all.a_chebyshev >= all.a_minmax - 1e-12);
    REQUIRE_THROWS_AS(acceptance_rates({}, virt), std::invalid_argument);
    REQUIRE_THROWS_AS(acceptance_rates(real, {}), std::invalid_argument);
}

TEST_CASE("normal acceptance rate of a Gaussian approaches 95.4 percent") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(10.0, 2.0);
    std::vector<double> real, virt;
    for (int i = 0; i < 10000; ++i) real.push_back(gauss(rng));
    for (int i = 0; i < 10000; ++i) virt.push_back(gauss(rng));
    AcceptanceReport rep = acceptance_rates(real, virt);
    REQUIRE(rep.a_normal == Approx(95.4).margin(1.0));
    REQUIRE(rep.a_chebyshev > 99.0);
}

TEST_CASE("acceptance rates are invariant to an affine rescaling of the biomarker") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> un(0.0, 5.0);
    std::vector<double> real, virt;
    for (int i = 0; i < 200; ++i) real.push_back(un(rng));
    for (int i = 0; i < 200; ++i) virt.push_back(un(rng));
    AcceptanceReport a = acceptance_rates(real, virt);
    auto scaled = [](std::vector<double> v) {
        for (double& x : v) x = 3.0 * x - 7.0;
        return v;
    };
    AcceptanceReport b = acceptance_rates(scaled(real), scaled(virt));
    REQUIRE(a.a_minmax == Approx(b.a_minmax));
    REQUIRE(a.a_chebyshev == Approx(b.a_chebyshev));
    REQUIRE(a.a_normal == Approx(b.a_normal));
}

TEST_CASE("paired t-test basics") {
    // identical samples -> t = 0, p = 1
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
    PairedTTest same = paired_t_test(a, a);
    REQUIRE(same.t == 0.0);
    REQUIRE(same.p == Approx(1.0));
    REQUIRE(same.dof == 3);
    // a constant shift with zero variance of differences -> p = 0
    std::vector<double> b = {2.0, 3.0, 4.0, 5.0};
    PairedTTest shift = paired_t_test(a, b);
    REQUIRE(shift.p == Approx(0.0).margin(1e-12));
    REQUIRE_THROWS_AS(paired_t_test(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("paired t-test matches a tabulated example") {
    // d = {1, -1, 2, 0, 3}: mean 1, sample sd sqrt(2.5), t = 1/(sqrt(2.5)/sqrt(5))
    std::vector<double> a = {5.0, 4.0, 7.0, 3.0, 8.0};
    std::vector<double> b = {4.0, 5.0, 5.0, 3.0, 5.0};
    PairedTTest r = paired_t_test(a, b);
    REQUIRE(r.t == Approx(std::sqrt(2.0)).epsilon(1e-9));
    REQUIRE(r.dof == 4);
    // two-sided p for t = 1.4142, dof = 4 is about 0.230
    REQUIRE(r.p == Approx(0.2302).margin(0.002));
}

TEST_CASE("t-test p-values are calibrated on null data") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int rejections = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(20), b(20);
        for (int i = 0; i < 20; ++i) {
            a[i] = gauss(rng);
            b[i] = gauss(rng);
        }
        if (paired_t_test(a, b).p < 0.05) ++rejections;
    }
    double rate = static_cast<double>(rejections) / trials;
    REQUIRE(rate == Approx(0.05).margin(0.02));
}

TEST_CASE("metric names parse and dispatch") {
    REQUIRE(metric_from_string("hd") == DistanceMetric::HD);
    REQUIRE(metric_from_string("CD") == DistanceMetric::CD);
    REQUIRE_THROWS_AS(metric_from_string("emd"), std::invalid_argument);
    std::mt19937_64 rng(8);
    MatX3 a = test::random_points(5, rng), b = test::random_points(7, rng);
    REQUIRE(shape_distance(a, b, DistanceMetric::CD) == Approx(chamfer_distance(a, b)));
    REQUIRE(shape_distance(a, b, DistanceMetric::HD) == Approx(hausdorff_distance(a, b)));
}
