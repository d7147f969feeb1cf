#include <catch_amalgamated.hpp>

#include "scem/env.hpp"
#include "scem/features.hpp"

using namespace scem;

TEST_CASE("tabular map yields indicator rows") {
    const FeatureMap map = FeatureMap::tabular(3);
    CHECK((build_matrix(map, 3) - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("quadratic map dimension and ordering") {
    const FeatureMap map = FeatureMap::quadratic(4);
    CHECK(map.k() == 11);
    Vector s(4);
    s << 1, 2, 3, 4;
    const Vector f = map.evaluate(s);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 1.0);   // s1^2
    CHECK(f[4] == 16.0);  // s4^2
    CHECK(f[5] == 2.0);   // s1 s2
    CHECK(f[6] == 3.0);   // s1 s3
    CHECK(f[10] == 12.0); // s3 s4
}

TEST_CASE("quadratic dimension formula matches the combinatorial count") {
    for (int d = 1; d <= 12; ++d) {
        const FeatureMap map = FeatureMap::quadratic(d);
        int count = 1 + d;  // constant + squares
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) ++count;
        CHECK(map.k() == count);
        Vector s = Vector::Ones(d);
        CHECK(map.evaluate(s).size() == count);
    }
}

TEST_CASE("rbf is 1 at its own center and bounded by (0,1]") {
    Vector centers(3), widths(3);
    centers << 10, 30, 50;
    widths << 10, 10, 10;
    const FeatureMap map = FeatureMap::rbf(centers, widths);
    for (int i = 0; i < 3; ++i) {
        Vector s(1);
        s << centers[i];
        const Vector f = map.evaluate(s);
        CHECK(f[i] == 1.0);
    }
    for (int s_id = 0; s_id < 60; ++s_id) {
        const Vector f = map.evaluate_id(s_id);
        CHECK(f.minCoeff() > 0.0);
        CHECK(f.maxCoeff() <= 1.0);
    }
}

TEST_CASE("rbf grid reproduces the benchmark centers") {
    // n=1000, k=50 -> centers 10+20(i-1), widths 10
    const FeatureMap map = FeatureMap::rbf_grid(1000, 50);
    Vector s(1);
    s << 10.0;
    CHECK(map.evaluate(s)[0] == 1.0);
    s << 990.0;
    CHECK(map.evaluate(s)[49] == 1.0);
    s << 30.0;
    CHECK(map.evaluate(s)[1] == 1.0);
    s << 20.0;  // halfway between bumps 1 and 2
    CHECK(map.evaluate(s)[0] == Catch::Approx(std::exp(-0.5)));
}

TEST_CASE("fourier basis values") {
    const FeatureMap map = FeatureMap::fourier(8, 1.0);  // no normalization
    Vector s(1);
    s << 1.0;
    const Vector f = map.evaluate(s);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == Catch::Approx(std::sin(3.14159265358979323846)).margin(1e-12));  // i=2
    CHECK(f[2] == Catch::Approx(std::cos(2.0 * 3.14159265358979323846)));          // i=3
    for (int s_id = 0; s_id < 5; ++s_id) {
        const Vector g = map.evaluate_id(s_id);
        CHECK(g.minCoeff() >= -1.0);
        CHECK(g.maxCoeff() <= 1.0);
    }
}

TEST_CASE("explicit matrices reproduce the printed benchmark rows") {
    SECTION("star, perfect features") {
        auto [m, phi] = make_baird(true, 0.9);
        Vector row0(8), row6(8);
        row0 << 1, 2, 0, 0, 0, 0, 0, 0;
        row6 << 2, 0, 0, 0, 0, 0, 0, 1;
        CHECK((phi.row(0).transpose() - row0).norm() == 0.0);
        CHECK((phi.row(6).transpose() - row6).norm() == 0.0);
    }
    SECTION("star, imperfect features") {
        auto [m, phi] = make_baird(false, 0.99);
        Vector row5(8);
        row5 << 1, 0, 0, 0, 0, 0, 0, 3;
        CHECK((phi.row(5).transpose() - row5).norm() == 0.0);
        CHECK(phi(0, 6) == 1.0);
    }
    SECTION("ring repeats the printed rows for states 9 and 10") {
        auto [m, phi] = make_ring(0.5);
        CHECK((phi.row(8) - phi.row(7)).norm() == 0.0);
        CHECK((phi.row(9) - phi.row(5)).norm() == 0.0);
    }
}

TEST_CASE("build_matrix rows equal evaluate bit-exactly") {
    const FeatureMap map = FeatureMap::rbf_grid(100, 8);
    const Matrix phi = build_matrix(map, 100);
    for (int s = 0; s < 100; ++s)
        CHECK((phi.row(s).transpose() - map.evaluate_id(s)).norm() == 0.0);
}

TEST_CASE("dimension mismatch raises") {
    const FeatureMap map = FeatureMap::quadratic(4);
    Vector s(3);
    s.setZero();
    CHECK_THROWS(map.evaluate(s));
}

TEST_CASE("standardization divides features by the given scales") {
    FeatureMap map = FeatureMap::quadratic(2);
    Vector scales(4);
    scales << 1.0, 2.0, 4.0, 8.0;
    map.set_scales(scales);
    Vector s(2);
    s << 2.0, 4.0;
    const Vector f = map.evaluate(s);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 2.0);   // 4/2
    CHECK(f[2] == 4.0);   // 16/4
    CHECK(f[3] == 1.0);   // 8/8
}
