#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gainswitch/ecdf.hpp"
#include "gainswitch/ks_test.hpp"

using namespace gainswitch;

namespace {

// Independent oracle: P(D >= d) by exhausting every interleaving of n x's
// and m y's (the exact no-ties null distribution).
double brute_force_pvalue(double d, int n, int m) {
    std::vector<int> labels(std::size_t(n + m), 0);
    std::fill(labels.begin(), labels.begin() + n, 1);
    std::sort(labels.begin(), labels.end()); // lowest permutation first
    long total = 0, at_least = 0;
    do {
        double fx = 0.0, fy = 0.0, dmax = 0.0;
        for (const int is_x : labels) {
            if (is_x)
                fx += 1.0 / n;
            else
                fy += 1.0 / m;
            dmax = std::max(dmax, std::abs(fx - fy));
        }
        ++total;
        if (dmax >= d - 1e-12) ++at_least;
    } while (std::next_permutation(labels.begin(), labels.end()));
    return double(at_least) / double(total);
}

std::vector<double> uniform_samples(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = u(rng);
    return out;
}

} // namespace

TEST_CASE("ecdf counts correctly") {
    const auto single = Ecdf::from_samples({0.0});
    CHECK(single(-0.1) == 0.0);
    CHECK(single(0.0) == 1.0);
    CHECK(single(10.0) == 1.0);

    const auto ties = Ecdf::from_samples({2.0, 2.0, 2.0, 2.0});
    CHECK(ties.values.size() == 1);
    CHECK(ties(1.999) == 0.0);
    CHECK(ties(2.0) == 1.0);

    const auto quad = Ecdf::from_samples({1, 2, 3, 4});
    CHECK(quad(2.5) == doctest::Approx(0.5));

    CHECK_THROWS_AS(Ecdf::from_samples({}), config_error);
}

TEST_CASE("ks statistic on constructed sample pairs") {
    std::vector<double> x, y;
    for (int i = 1; i <= 201; ++i) {
        x.push_back(double(i));
        y.push_back(i <= 196 ? double(i) : double(i) + 1000.0);
    }
    CHECK(ks_statistic(x, x) == 0.0);
    CHECK(ks_statistic(x, y) == doctest::Approx(5.0 / 201.0).epsilon(1e-12));

    const std::vector<double> lo{1, 2, 3}, hi{10, 11, 12, 13};
    CHECK(ks_statistic(lo, hi) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ks_statistic({}, hi), config_error);
}

TEST_CASE("exact p-value agrees with exhaustive enumeration") {
    struct Probe { double d; int n, m; };
    for (const Probe probe : {Probe{0.5, 4, 5}, Probe{0.4, 6, 6}, Probe{0.3, 8, 5},
                              Probe{2.0 / 3.0, 3, 6}, Probe{0.25, 7, 7}}) {
        const double expect = brute_force_pvalue(probe.d, probe.n, probe.m);
        const double got = ks_pvalue_exact(probe.d, std::size_t(probe.n), std::size_t(probe.m));
        CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("exact p-value boundary cases") {
    CHECK(ks_pvalue_exact(0.0, 201, 201) == 1.0);
    // complete separation of two ten-sample sets: 2 of C(20,10) orderings
    CHECK(ks_pvalue_exact(1.0, 10, 10) ==
          doctest::Approx(1.0825088224469026e-05).epsilon(1e-9));
}

TEST_CASE("exact p-value matches the published comparison run") {
    const double d = 0.024875621890547265; // 10/402, printed reduced as 5/201
    CHECK(ks_pvalue_exact(d, 402, 402) ==
          doctest::Approx(0.999664050220288).epsilon(1e-9));
    // at 201 samples per record the same statistic is far less surprising;
    // regression-pinned value from this implementation (enumeration-backed)
    CHECK(ks_pvalue_exact(d, 201, 201) ==
          doctest::Approx(0.9999999825640382).epsilon(1e-9));
}

TEST_CASE("asymptotic p-value saturates where the exact method still resolves") {
    const double d = 0.024875621890547265;
    CHECK(ks_pvalue_asymptotic(0.0, 201, 201) == 1.0);
    const double asym201 = ks_pvalue_asymptotic(d, 201, 201);
    CHECK(asym201 > 0.9999);
    const double asym402 = ks_pvalue_asymptotic(d, 402, 402);
    CHECK(std::abs(asym402 - 0.999664050220288) > 1e-5); // cannot hit the exact digits
}

TEST_CASE("p-values are symmetric in the two sample sizes") {
    CHECK(ks_pvalue_exact(0.31, 9, 17) == ks_pvalue_exact(0.31, 17, 9));
    CHECK(ks_pvalue_asymptotic(0.31, 9, 17) == ks_pvalue_asymptotic(0.31, 17, 9));
}

TEST_CASE("ks statistic is symmetric and transform invariant") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = uniform_samples(rng, 23);
        auto y = uniform_samples(rng, 31);
        const double d = ks_statistic(x, y);
        CHECK(ks_statistic(y, x) == d);

        auto gx = x, gy = y;
        for (auto& v : gx) v = std::exp(2.0 * v) + 3.0; // strictly increasing map
        for (auto& v : gy) v = std::exp(2.0 * v) + 3.0;
        CHECK(ks_statistic(gx, gy) == d);
    }
}

TEST_CASE("p-value is non-increasing in d for both methods") {
    double last_exact = 2.0, last_asym = 2.0;
    for (double d = 0.0; d <= 1.0; d += 0.02) {
        const double pe = ks_pvalue_exact(d, 25, 30);
        const double pa = ks_pvalue_asymptotic(d, 25, 30);
        CHECK(pe <= last_exact + 1e-15);
        CHECK(pa <= last_asym + 1e-15);
        last_exact = pe;
        last_asym = pa;
    }
}

TEST_CASE("exact p-value agrees with a permutation Monte Carlo estimate") {
    std::mt19937 rng(20240812);
    auto x = uniform_samples(rng, 12);
    auto y = uniform_samples(rng, 9);
    for (auto& v : y) v = 0.85 * v + 0.1; // mild shift, moderate D
    const double d_obs = ks_statistic(x, y);
    const double p_exact = ks_pvalue_exact(d_obs, x.size(), y.size());

    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    std::vector<int> labels(pooled.size(), 0);
    std::fill(labels.begin(), labels.begin() + std::ptrdiff_t(x.size()), 1);

    const int shuffles = 20000;
    int hits = 0;
    for (int s = 0; s < shuffles; ++s) {
        std::shuffle(labels.begin(), labels.end(), rng);
        double fx = 0.0, fy = 0.0, dmax = 0.0;
        for (std::size_t k = 0; k < pooled.size(); ++k) {
            if (labels[k])
                fx += 1.0 / double(x.size());
            else
                fy += 1.0 / double(y.size());
            dmax = std::max(dmax, std::abs(fx - fy));
        }
        if (dmax >= d_obs - 1e-12) ++hits;
    }
    const double p_mc = double(hits) / shuffles;
    const double se = std::sqrt(std::max(p_mc * (1.0 - p_mc), 1e-9) / shuffles);
    CHECK(std::abs(p_exact - p_mc) <= 3.0 * se);
}

TEST_CASE("auto method selection respects the exact limit") {
    const auto small = ks_test({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
    CHECK(small.method == KsMethod::kExact);

    std::vector<double> big_x(2000), big_y(2000);
    for (int i = 0; i < 2000; ++i) {
        big_x[i] = i;
        big_y[i] = i + 0.5;
    }
    const auto big = ks_test(big_x, big_y);
    CHECK(big.method == KsMethod::kAsymptotic);
    CHECK_THROWS_AS(ks_pvalue(0.1, 2000, 2000, KsMethod::kExact), config_error);
}

TEST_CASE("tie warning triggers on heavily tied samples") {
    std::vector<double> plateau(40, 1.0), distinct(40);
    for (int i = 0; i < 40; ++i) distinct[i] = i;
    std::mt19937 rng(5);
    CHECK(ks_test(plateau, plateau).tie_warning);
    CHECK_FALSE(ks_test(distinct, uniform_samples(rng, 40)).tie_warning);
}

TEST_CASE("waveform self-comparison is a perfect match") {
    std::vector<double> t(64), v(64);
    for (int i = 0; i < 64; ++i) {
        t[i] = i * 1e-12;
        const double x = (i - 30.0) / 6.0;
        v[i] = std::exp(-x * x);
    }
    const auto w = make_waveform(t, v);
    const auto cmp = compare_waveforms(w, w, 64);
    CHECK(cmp.ks.d == 0.0);
    CHECK(cmp.ks.p_value == 1.0);
    CHECK(cmp.ks.tie_warning); // every sample tied with its twin
}

TEST_CASE("an extra pulse peak makes waveforms statistically distinguishable") {
    std::vector<double> t(201), clean(201), bumped(201);
    for (int i = 0; i < 201; ++i) {
        t[i] = i * 1e-12;
        const double main = std::exp(-std::pow((i - 60.0) / 9.0, 2));
        clean[i] = main;
        bumped[i] = main + 0.5 * std::exp(-std::pow((i - 120.0) / 16.0, 2));
    }
    const auto cmp = compare_waveforms(make_waveform(t, clean), make_waveform(t, bumped), 201);
    CHECK(cmp.ks.p_value < 0.05);
    CHECK(cmp.ks.d > 0.1);

    // and two copies of the clean pulse at different delays agree
    std::vector<double> delayed(201, 0.0);
    for (int i = 25; i < 201; ++i) delayed[i] = clean[i - 25];
    const auto same = compare_waveforms(make_waveform(t, clean),
                                        make_waveform(t, delayed), 201);
    CHECK(same.ks.p_value > 0.05);
}

TEST_CASE("ks results stay inside their bounds on random data") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> size_dist(1, 60);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(size_dist(rng)));
        std::vector<double> y(static_cast<std::size_t>(size_dist(rng)));
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = std::round(u(rng)); // integer grid forces ties
        const auto r = ks_test(x, y);
        CHECK(r.d >= 0.0);
        CHECK(r.d <= 1.0);
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(r.n == x.size());
        CHECK(r.m == y.size());
    }
}

TEST_CASE("asymptotic p-value hits the textbook 5% critical point") {
    // lambda = 1.358 is the classical two-sided critical value for alpha = 0.05
    const double d = 1.358 / std::sqrt(200.0 * 200.0 / 400.0);
    const double p = ks_pvalue_asymptotic(d, 200, 200);
    CHECK(p == doctest::Approx(0.05).epsilon(0.02));
    // and the exact method agrees closely at this unremarkable point
    CHECK(ks_pvalue_exact(d, 200, 200) == doctest::Approx(p).epsilon(0.08));
}
