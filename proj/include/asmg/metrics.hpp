#pragma once

#include <algorithm>
#include <functional>

#include "asmg/geometry.hpp"

namespace asmg {

enum class DistanceMetric { HD, CD };

inline DistanceMetric metric_from_string(const std::string& s) {
    if (s == "hd" || s == "HD") return DistanceMetric::HD;
    if (s == "cd" || s == "CD") return DistanceMetric::CD;
    throw std::invalid_argument("unknown metric: " + s);
}

inline double shape_distance(const MatX3& a, const MatX3& b, DistanceMetric m) {
    return m == DistanceMetric::HD ? hausdorff_distance(a, b) : chamfer_distance(a, b);
}

struct MetricSummary {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;
};

inline MetricSummary summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty value list");
    MetricSummary s;
    s.values = std::move(values);
    double n = static_cast<double>(s.values.size());
    for (double v : s.values) s.mean += v;
    s.mean /= n;
    for (double v : s.values) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / n);
    return s;
}

// Reconstruction error of a trained model on held-out shapes. The caller
// supplies the model's reconstruct step (warp -> encode mean -> decode).
inline MetricSummary generalisation(
    const std::function<MatX3(const SurfaceMesh&)>& reconstruct,
    const std::vector<SurfaceMesh>& held_out, DistanceMetric metric) {
    if (held_out.empty()) throw std::invalid_argument("generalisation: empty test set");
    std::vector<double> errs;
    errs.reserve(held_out.size());
    for (const auto& mesh : held_out)
        errs.push_back(shape_distance(reconstruct(mesh), MatX3(mesh.vertices), metric));
    return summarize(std::move(errs));
}

// Distance from each synthesized sample to its nearest real shape.
inline MetricSummary specificity(const std::vector<MatX3>& virtual_cohort,
                                 const std::vector<MatX3>& real_cohort, DistanceMetric metric) {
    if (virtual_cohort.empty() || real_cohort.empty())
        throw std::invalid_argument("specificity: empty cohort");
    std::vector<double> errs;
    errs.reserve(virtual_cohort.size());
    for (const auto& v : virtual_cohort) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : real_cohort) best = std::min(best, shape_distance(v, r, metric));
        errs.push_back(best);
    }
    return summarize(std::move(errs));
}

struct BiomarkerStats {
    double min = 0, max = 0, mean = 0, stddev = 0, mode = 0;
};

// Half-sample mode: recursively narrow to the densest half of the sorted
// sample.
inline double half_sample_mode(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("half_sample_mode: empty list");
    std::sort(values.begin(), values.end());
    std::size_t lo = 0, n = values.size();
    while (n > 3) {
        std::size_t h = (n + 1) / 2;
        std::size_t best = lo;
        double best_width = values[lo + h - 1] - values[lo];
        for (std::size_t i = lo; i + h <= lo + n; ++i) {
            double w = values[i + h - 1] - values[i];
            if (w < best_width) {
                best_width = w;
                best = i;
            }
        }
        lo = best;
        n = h;
    }
    if (n == 3) {
        double d01 = values[lo + 1] - values[lo];
        double d12 = values[lo + 2] - values[lo + 1];
        if (d01 < d12) return 0.5 * (values[lo] + values[lo + 1]);
        if (d12 < d01) return 0.5 * (values[lo + 1] + values[lo + 2]);
        return values[lo + 1];
    }
    if (n == 2) return 0.5 * (values[lo] + values[lo + 1]);
    return values[lo];
}

inline BiomarkerStats biomarker_stats(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("biomarker_stats: empty list");
    BiomarkerStats s;
    MetricSummary m = summarize(values);
    s.mean = m.mean;
    s.stddev = m.stddev;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.mode = half_sample_mode(values);
    return s;
}

// B = sqrt(sigma^2 + (mode - mu)^2); interval mode +- 3B
inline std::pair<double, double> chebyshev_interval(const BiomarkerStats& s) {
    double b = std::sqrt(s.stddev * s.stddev + (s.mode - s.mean) * (s.mode - s.mean));
    return {s.mode - 3.0 * b, s.mode + 3.0 * b};
}

struct AcceptanceReport {
    double a_minmax = 0;     // % inside [min, max]
    double a_chebyshev = 0;  // % inside mode +- 3B
    double a_normal = 0;     // % inside mean +- 2 sigma
};

inline AcceptanceReport acceptance_rates(const std::vector<double>& real_values,
                                         const std::vector<double>& virtual_values) {
    if (real_values.empty() || virtual_values.empty())
        throw std::invalid_argument("acceptance_rates: empty biomarker list");
    BiomarkerStats s = biomarker_stats(real_values);
    auto [clo, chi] = chebyshev_interval(s);
    double nlo = s.mean - 2.0 * s.stddev, nhi = s.mean + 2.0 * s.stddev;
    AcceptanceReport rep;
    double n = static_cast<double>(virtual_values.size());
    for (double v : virtual_values) {
        if (v >= s.min && v <= s.max) rep.a_minmax += 1;
        if (v >= clo && v <= chi) rep.a_chebyshev += 1;
        if (v >= nlo && v <= nhi) rep.a_normal += 1;
    }
    rep.a_minmax *= 100.0 / n;
    rep.a_chebyshev *= 100.0 / n;
    rep.a_normal *= 100.0 / n;
    return rep;
}

// Plain paired t statistic with two-sided p-value via the normal
// approximation for n >= 30, Student-t tail series otherwise.
struct PairedTTest {
    double t = 0.0;
    double p = 1.0;
    int dof = 0;
};

inline PairedTTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired_t_test: need equal-length samples, n >= 2");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    MetricSummary s = summarize(d);
    double n = static_cast<double>(d.size());
    double sd = s.stddev * std::sqrt(n / (n - 1.0));  // sample std
    PairedTTest out;
    out.dof = static_cast<int>(n) - 1;
    if (sd < 1e-300) {
        out.t = s.mean == 0.0 ? 0.0 : std::copysign(1e300, s.mean);
        out.p = s.mean == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.t = s.mean / (sd / std::sqrt(n));
    // two-sided p via incomplete beta I_x(dof/2, 1/2)
    double x = out.dof / (out.dof + out.t * out.t);
    // continued fraction evaluation of regularized incomplete beta
    auto betacf = [](double aa, double bb, double xx) {
        double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
        double c = 1.0, dd = 1.0 - qab * xx / qap;
        if (std::abs(dd) < 1e-30) dd = 1e-30;
        dd = 1.0 / dd;
        double h = dd;
        for (int m = 1; m <= 200; ++m) {
            int m2 = 2 * m;
            double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
            dd = 1.0 + num * dd;
            if (std::abs(dd) < 1e-30) dd = 1e-30;
            c = 1.0 + num / c;
            if (std::abs(c) < 1e-30) c = 1e-30;
            dd = 1.0 / dd;
            h *= dd * c;
            num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
            dd = 1.0 + num * dd;
            if (std::abs(dd) < 1e-30) dd = 1e-30;
            c = 1.0 + num / c;
            if (std::abs(c) < 1e-30) c = 1e-30;
            dd = 1.0 / dd;
            double del = dd * c;
            h *= del;
            if (std::abs(del - 1.0) < 1e-12) break;
        }
        return h;
    };
    double aa = out.dof / 2.0, bb = 0.5;
    double lnbeta = std::lgamma(aa) + std::lgamma(bb) - std::lgamma(aa + bb);
    double front = std::exp(aa * std::log(x) + bb * std::log(1.0 - x) - lnbeta);
    double ibeta = x < (aa + 1.0) / (aa + bb + 2.0)
                       ? front * betacf(aa, bb, x) / aa
                       : 1.0 - front * betacf(bb, aa, 1.0 - x) / bb;
    out.p = std::clamp(ibeta, 0.0, 1.0);
    return out;
}

}  // namespace asmg
