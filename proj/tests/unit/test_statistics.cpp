#include <doctest.h>

#include <random>

#include "../support/oracle.hpp"
#include "rapport/error.hpp"
#include "rapport/statistics.hpp"

using namespace rapport;

// Reference values below were computed once with scipy.stats (ttest_ind with
// equal_var=False, pearsonr) and frozen here.

TEST_CASE("Welch on shifted ranges") {
    auto w = welch_t_test({1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
    CHECK(w.t == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(w.df == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(std::fabs(w.p - 0.34659350708733416) < 1e-9);
}

TEST_CASE("Welch with unequal sizes and variances") {
    auto w = welch_t_test({3.1, 2.4, 5.6, 4.4, 3.9, 4.8}, {2.2, 1.9, 3.5, 2.8});
    CHECK(std::fabs(w.t - 2.424700660068784) < 1e-9);
    CHECK(std::fabs(w.df - 7.989809807303176) < 1e-9);
    CHECK(std::fabs(w.p - 0.0415816912049635) < 1e-9);
}

TEST_CASE("Welch is symmetric and exact on identical samples") {
    std::vector<double> a{4, 5, 3, 5, 4, 2}, b{1, 5, 5, 4, 3};
    auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
    CHECK(ab.p == ba.p);
    CHECK(ab.t == -ba.t);

    auto same = welch_t_test(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);
}

TEST_CASE("Welch degenerate and insufficient inputs") {
    auto eq = welch_t_test({3, 3, 3}, {3, 3});
    CHECK(eq.degenerate);
    CHECK(eq.p == 1.0);
    auto ne = welch_t_test({3, 3, 3}, {4, 4});
    CHECK(ne.degenerate);
    CHECK(ne.p == 0.0);
    CHECK_THROWS_AS(welch_t_test({1}, {1, 2, 3}), InsufficientData);
    CHECK_THROWS_AS(welch_t_test({1, 2}, {}), InsufficientData);
}

TEST_CASE("Pearson reference values") {
    auto r = pearson_r({1, 2, 3, 4, 5, 6, 7, 8}, {2.1, 3.9, 6.2, 7.8, 10.1, 12.2, 13.8, 16.1});
    CHECK(std::fabs(r.r - 0.999419474795813) < 1e-12);
    CHECK(std::fabs(r.p - 4.888933612558555e-10) < 1e-9);
    CHECK(r.n == 8);

    auto s = pearson_r({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
    CHECK(std::fabs(s.r - 0.8) < 1e-12);
    CHECK(std::fabs(s.p - 0.10408803866182799) < 1e-9);
}

TEST_CASE("Pearson on exact lines") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> up, down;
    for (double v : x) {
        up.push_back(2 * v + 1);
        down.push_back(-v);
    }
    auto a = pearson_r(x, up);
    CHECK(a.r == 1.0);
    CHECK(a.p == 0.0);
    CHECK(pearson_r(x, down).r == -1.0);
}

TEST_CASE("Pearson rejects bad input") {
    CHECK_THROWS_AS(pearson_r({1, 2}, {1, 2}), InsufficientData);
    CHECK_THROWS_AS(pearson_r({1, 2, 3}, {1, 2}), InsufficientData);
    CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), ConstantInput);
}

TEST_CASE("Pearson on a latent-correlation fixture matches the covariance formula") {
    std::mt19937_64 rng(50);
    std::normal_distribution<double> z;
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        double a = z(rng), b = z(rng);
        x.push_back(a);
        y.push_back(0.6 * a + 0.8 * b);
    }
    auto got = pearson_r(x, y);
    auto ref = oracle::pearson(x, y);
    CHECK(std::fabs(got.r - ref.r) < 1e-12);
    CHECK(std::fabs(got.p - ref.p) < 1e-9);
}

TEST_CASE("t tail agrees with numerical integration of the density") {
    for (double df : {1.0, 1.5, 2.0, 3.7, 10.0, 58.3, 400.0}) {
        for (double t : {0.0, 0.1, 0.7, 1.96, 3.0, 6.5, 15.0}) {
            CHECK_MESSAGE(std::fabs(student_t_two_sided(t, df) - oracle::two_sided_p(t, df)) < 1e-10,
                          "t=" << t << " df=" << df);
        }
    }
    CHECK(student_t_two_sided(-2.0, 5) == student_t_two_sided(2.0, 5));
}

TEST_CASE("p-values and r stay in range on random data") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> a(3 + rng() % 20), b(2 + rng() % 20);
        for (auto& v : a) v = z(rng) * 3;
        for (auto& v : b) v = z(rng) + 1;
        auto w = welch_t_test(a, b);
        CHECK(w.p >= 0.0);
        CHECK(w.p <= 1.0);
        std::vector<double> y(a.size());
        for (auto& v : y) v = z(rng);
        auto c = pearson_r(a, y);
        CHECK(c.r >= -1.0);
        CHECK(c.r <= 1.0);
        CHECK(c.p >= 0.0);
        CHECK(c.p <= 1.0);
    }
}

TEST_CASE("mean and variance") {
    CHECK(mean({1, 2, 3, 4}) == 2.5);
    CHECK(sample_variance({1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));
}
