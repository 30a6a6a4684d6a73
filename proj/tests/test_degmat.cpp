#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "conewave/degmat.hpp"
#include "support/oracles.hpp"

using namespace conewave;

TEST_CASE("validate accepts the reference matrices") {
    CHECK(validate(biregular_matrix(3, 2)).valid);
    CHECK(validate(regular_matrix(5)).valid);
    CHECK(validate(regular_matrix(3)).valid);
    CHECK(validate(k4_matrix()).valid);
}

TEST_CASE("validate rejects [[2]] by the growth condition") {
    auto rep = validate(regular_matrix(2));
    CHECK_FALSE(rep.valid);
    REQUIRE_FALSE(rep.failures.empty());
    CHECK(rep.failures.front().condition == 4);
}

TEST_CASE("validate flags asymmetric support and broken ratios") {
    DegreeMatrix asym(2, {0, 3, 0, 3});
    auto rep = validate(asym);
    CHECK_FALSE(rep.valid);
    bool saw1 = false;
    for (auto& f : rep.failures) saw1 = saw1 || f.condition == 1;
    CHECK(saw1);

    // Ratio condition needs a triangle of support; break it deliberately.
    DegreeMatrix bad(3, {0, 2, 1, 1, 0, 1, 1, 1, 0});
    auto rep2 = validate(bad);
    bool saw2 = false;
    for (auto& f : rep2.failures) saw2 = saw2 || f.condition == 2;
    CHECK(saw2 == !oracles::brute_force_valid(bad));
}

TEST_CASE("validate agrees with the brute-force condition check on random matrices") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> entry(0, 3);
    std::uniform_int_distribution<int> dim(1, 4);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        int k = dim(rng);
        std::vector<long long> e(k * k);
        for (auto& x : e) x = entry(rng);
        DegreeMatrix d(k, e);
        CHECK(validate(d).valid == oracles::brute_force_valid(d));
        ++checked;
    }
    CHECK(checked == 400);
}

TEST_CASE("type fractions of the reference matrices") {
    auto q32 = type_fractions(biregular_matrix(3, 2));
    CHECK(q32.q[0] == Rational(2, 5));
    CHECK(q32.q[1] == Rational(3, 5));

    auto q5 = type_fractions(regular_matrix(5));
    CHECK(q5.q[0] == Rational(1));

    auto qk4 = type_fractions(k4_matrix());
    for (auto& r : qk4.q) CHECK(r == Rational(1, 4));
}

TEST_CASE("type fractions balance half-edge counts exactly") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> entry(0, 4);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 1 + static_cast<int>(rng() % 4);
        std::vector<long long> e(k * k);
        for (auto& x : e) x = entry(rng);
        DegreeMatrix d(k, e);
        if (!validate(d).valid) continue;
        auto q = type_fractions(d);
        Rational total(0);
        for (auto& r : q.q) {
            CHECK(r > Rational(0));
            total += r;
        }
        CHECK(total == Rational(1));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (d(i, j) > 0) CHECK(q.q[i] * d(i, j) == q.q[j] * d(j, i));
    }
}

TEST_CASE("feasible counts for biregular (3,2)") {
    auto f5 = feasible_counts(biregular_matrix(3, 2), 5);
    REQUIRE(f5.feasible);
    CHECK(f5.counts == std::vector<long long>{2, 3});

    auto f7 = feasible_counts(biregular_matrix(3, 2), 7);
    CHECK_FALSE(f7.feasible);
    CHECK(f7.next_feasible == 10);
}

TEST_CASE("feasible counts respect within-type parity") {
    auto f4 = feasible_counts(regular_matrix(5), 4);
    REQUIRE(f4.feasible);
    CHECK(f4.counts == std::vector<long long>{4});

    auto f3 = feasible_counts(regular_matrix(5), 3);  // 15 half-edges, odd
    CHECK_FALSE(f3.feasible);
    CHECK(f3.next_feasible == 4);
}
