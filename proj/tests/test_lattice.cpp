#include "torpsido/lattice.hpp"

#include "torpsido/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace torpsido;

TEST_CASE("frequency window enumeration") {
    const FrequencyWindow window(2, 2);
    CHECK(window.size() == 25);

    // lexicographic, deterministic, first and last entries
    CHECK(window.frequency(0)[0] == -2);
    CHECK(window.frequency(0)[1] == -2);
    CHECK(window.frequency(24)[0] == 2);
    CHECK(window.frequency(24)[1] == 2);

    // contains zero, symmetric under negation
    const std::vector<int> zero{0, 0};
    const Index zero_idx = window.index_of(zero);
    CHECK(window.frequency(zero_idx)[0] == 0);
    for (Index k = 0; k < window.size(); ++k) {
        const auto xi = window.frequency(k);
        const Index neg = window.negated_index(k);
        CHECK(window.frequency(neg)[0] == -xi[0]);
        CHECK(window.frequency(neg)[1] == -xi[1]);
    }

    // index_of inverts the enumeration
    for (Index k = 0; k < window.size(); ++k) {
        const auto xi = window.frequency(k);
        CHECK(window.index_of(xi) == k);
    }

    CHECK_THROWS_AS(window.index_of(std::vector<int>{3, 0}), ValidationError);
    CHECK_THROWS_AS(FrequencyWindow(0, 1), ValidationError);
    CHECK_THROWS_AS(FrequencyWindow(1, -1), ValidationError);
}

TEST_CASE("grid quadrature is exact on characters below the sampling limit") {
    const TorusGrid grid(1, 7);
    const auto roots = unit_roots(7);
    for (int xi = 0; xi < 7; ++xi) {
        Complex acc(0.0, 0.0);
        const std::vector<int> freq{xi};
        for (Index j = 0; j < grid.size(); ++j) {
            acc += roots[static_cast<std::size_t>(grid.dot_mod(j, freq))];
        }
        acc *= grid.quadrature_weight();
        const Complex expected = xi == 0 ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
        CHECK(std::abs(acc - expected) <= 1e-14);
    }
}

TEST_CASE("forward transform of constants and characters") {
    const TorusGrid grid(2, 5);
    const FrequencyWindow window(2, 2);

    Vector v(3);
    v << Complex(1, 2), Complex(-0.5, 0), Complex(0, 1);

    SUBCASE("constant field") {
        Matrix samples(3, grid.size());
        for (Index j = 0; j < grid.size(); ++j) samples.col(j) = v;
        const auto hat = forward_vft(VectorField(grid, samples), window);
        for (Index k = 0; k < window.size(); ++k) {
            const bool is_zero_freq = window.shell(k) == 0;
            const Vector expected = is_zero_freq ? v : Vector(Vector::Zero(3));
            CHECK((hat.values().col(k) - expected).norm() <= 1e-14);
        }
    }

    SUBCASE("single character lands on its frequency") {
        const std::vector<int> eta{1, -2};
        const auto hat = forward_vft(character_field(grid, eta, v), window);
        for (Index k = 0; k < window.size(); ++k) {
            const Vector expected =
                (k == window.index_of(eta)) ? v : Vector(Vector::Zero(3));
            CHECK((hat.values().col(k) - expected).norm() <= 1e-13);
        }
    }
}

TEST_CASE("transform roundtrip and Plancherel on random band-limited fields") {
    auto gen = testing::rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 1 + trial % 2;
        const int N = 2 + trial % 3;
        const FrequencyWindow window(n, N);
        const TorusGrid grid(n, 2 * N + 1 + 2 * (trial % 2));
        const VectorField f = testing::random_band_limited_field(grid, window, 2, gen);

        const auto hat = forward_vft(f, window);
        const VectorField back = inverse_vft(hat, grid);
        CHECK(testing::relative_error(back.samples(), f.samples()) <= 1e-12);

        // Plancherel at p = 2, both sides computed directly
        double space_side = 0.0;
        for (Index j = 0; j < grid.size(); ++j) space_side += f.samples().col(j).squaredNorm();
        space_side *= grid.quadrature_weight();
        double freq_side = 0.0;
        for (Index k = 0; k < window.size(); ++k) freq_side += hat.values().col(k).squaredNorm();
        CHECK(space_side == doctest::Approx(freq_side).epsilon(1e-12));
        CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(freq_side)).epsilon(1e-12));
    }
}

TEST_CASE("coefficients supported at zero give constant fields") {
    const FrequencyWindow window(1, 3);
    const TorusGrid grid(1, 9);
    Matrix values = Matrix::Zero(2, window.size());
    Vector v(2);
    v << Complex(0.5, -1), Complex(2, 0.25);
    values.col(window.index_of(std::vector<int>{0})) = v;
    const VectorField f = inverse_vft(FourierCoefficients(window, values), grid);
    for (Index j = 0; j < grid.size(); ++j) {
        CHECK((f.samples().col(j) - v).norm() <= 1e-14);
    }
}

TEST_CASE("lp norms") {
    const TorusGrid grid(1, 8);
    Vector v(2);
    v << Complex(3, 4), Complex(0, 0);  // |v| = 5

    Matrix samples(2, grid.size());
    for (Index j = 0; j < grid.size(); ++j) samples.col(j) = v;
    const VectorField constant(grid, samples);

    for (double p : {1.0, 2.0, 3.5}) {
        CHECK(lp_norm(constant, p) == doctest::Approx(5.0).epsilon(1e-14));
    }

    SUBCASE("homogeneity and triangle inequality on random fields") {
        auto gen = testing::rng(5);
        const FrequencyWindow window(1, 3);
        const VectorField f = testing::random_band_limited_field(grid, window, 2, gen);
        const VectorField g = testing::random_band_limited_field(grid, window, 2, gen);
        for (double p : {1.0, 2.0, 4.0}) {
            const double scaled = lp_norm(VectorField(grid, Matrix(2.5 * f.samples())), p);
            CHECK(scaled == doctest::Approx(2.5 * lp_norm(f, p)).epsilon(1e-12));
            const double sum_norm = lp_norm(VectorField(grid, Matrix(f.samples() + g.samples())), p);
            CHECK(sum_norm <= lp_norm(f, p) + lp_norm(g, p) + 1e-12);
            CHECK(lp_norm(f, p) >= 0.0);
        }
    }

    CHECK_THROWS_AS(lp_norm(constant, 0.5), ValidationError);
}

TEST_CASE("discrete lp norms") {
    const FrequencyWindow support(1, 2);
    Vector v(2);
    v << Complex(1, 1), Complex(2, 0);

    SUBCASE("single site") {
        Matrix values = Matrix::Zero(2, support.size());
        values.col(1) = v;
        const LatticeField f(support, values);
        for (double p : {1.0, 2.0, 3.0}) {
            CHECK(discrete_lp_norm(f, p) == doctest::Approx(v.norm()).epsilon(1e-14));
        }
    }

    SUBCASE("two disjoint sites add in p = 1, squares add in p = 2") {
        Matrix values = Matrix::Zero(2, support.size());
        values.col(0) = v;
        values.col(3) = 2.0 * v;
        const LatticeField f(support, values);
        CHECK(discrete_lp_norm(f, 1.0) == doctest::Approx(3.0 * v.norm()).epsilon(1e-14));
        const double two = discrete_lp_norm(f, 2.0);
        CHECK(two * two == doctest::Approx(5.0 * v.squaredNorm()).epsilon(1e-14));
    }

    CHECK_THROWS_AS(discrete_lp_norm(LatticeField(support, 1), 0.2), ValidationError);
}

TEST_CASE("grid preconditions") {
    const FrequencyWindow window(1, 3);
    const TorusGrid coarse(1, 5);  // < 2N+1 = 7
    CHECK_THROWS_AS(forward_vft(VectorField(coarse, 1), window), ValidationError);
    CHECK_THROWS_AS(inverse_vft(FourierCoefficients(window, 1), coarse), ValidationError);
}
