#include <catch2/catch_amalgamated.hpp>

#include "finset/linalg.hpp"
#include "finset/rng.hpp"

using namespace finset;

TEST_CASE("identical seed and stream reproduce the sequence", "[rng]") {
    RngState a(42, 7);
    RngState b(42, 7);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    RngState c(42, 7);
    RngState d(42, 7);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(c.next_gaussian() == d.next_gaussian());
    }
}

TEST_CASE("different streams decorrelate", "[rng]") {
    RngState a(42, 0);
    RngState b(42, 1);
    int equal = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++equal;
    }
    REQUIRE(equal == 0);
}

TEST_CASE("uniform draws stay in the unit interval", "[rng]") {
    RngState rng(5);
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        mean += u;
    }
    mean /= n;
    REQUIRE(mean == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("zero covariance factor returns the mean", "[rng]") {
    RngState rng(1);
    const CholeskyFactor zero(Matrix(2, 2));
    const Vector out = sample_gaussian({1.0, 2.0}, zero, rng);
    REQUIRE(out[0] == 1.0);
    REQUIRE(out[1] == 2.0);
}

TEST_CASE("fixed seed gives a reproducible gaussian pair", "[rng]") {
    RngState a(42);
    RngState b(42);
    const CholeskyFactor id = cholesky(Matrix::identity(2));
    const Vector first = sample_gaussian({0.0, 0.0}, id, a);
    const Vector second = sample_gaussian({0.0, 0.0}, id, b);
    REQUIRE(first == second);
}

TEST_CASE("sample variance matches the configured covariance", "[rng]") {
    RngState rng(12345);
    const CholeskyFactor f = cholesky(Matrix::diagonal({4.0}));
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_gaussian({0.0}, f, rng)[0];
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    REQUIRE(var >= 3.8);
    REQUIRE(var <= 4.2);
}

TEST_CASE("sample_gaussian rejects mismatched dimensions", "[rng]") {
    RngState rng(1);
    const CholeskyFactor id = cholesky(Matrix::identity(2));
    REQUIRE_THROWS_AS(sample_gaussian({0.0, 0.0, 0.0}, id, rng), DimensionMismatch);
}
