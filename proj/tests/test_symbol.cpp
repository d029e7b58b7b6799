#include "torpsido/symbol.hpp"

#include "torpsido/errors.hpp"
#include "torpsido/quantize.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <numbers>

using namespace torpsido;

TEST_CASE("identity and bessel families") {
    const FrequencyWindow window(2, 2);
    const SymbolTable id = make_identity_symbol(window, 3);
    CHECK(id.is_multiplier());
    CHECK(id.tail() == TailSpec::invertible_identity_like);
    for (Index k = 0; k < window.size(); ++k) {
        CHECK((id.value(k) - Matrix::Identity(3, 3)).norm() == 0.0);
    }

    const FrequencyWindow line(1, 3);
    const SymbolTable bessel = make_bessel_symbol(line, 2, 1.0);
    const Index at_three = line.index_of(std::vector<int>{3});
    CHECK((bessel.value(at_three) - std::sqrt(10.0) * Matrix::Identity(2, 2)).norm() <= 1e-15);
}

TEST_CASE("random families reproduce bit-identical tables from a seed") {
    const FrequencyWindow window(1, 3);
    SymbolFamilyParams params;
    params.dim_in = params.dim_out = 2;
    params.decay = 1.5;
    params.seed = 314159;
    const SymbolTable a = make_family("random-decay", window, params);
    const SymbolTable b = make_family("random-decay", window, params);
    for (Index k = 0; k < window.size(); ++k) {
        for (Index r = 0; r < 2; ++r) {
            for (Index c = 0; c < 2; ++c) {
                CHECK(a.value(k)(r, c).real() == b.value(k)(r, c).real());
                CHECK(a.value(k)(r, c).imag() == b.value(k)(r, c).imag());
            }
        }
    }

    params.x_dependent = true;
    const TorusGrid grid(1, 13);
    const SymbolTable c = make_family("random-decay", window, params, grid);
    const SymbolTable d = make_family("random-decay", window, params, grid);
    CHECK((c.value(5, 2) - d.value(5, 2)).norm() == 0.0);

    params.x_dependent = false;
    params.seed = std::nullopt;
    CHECK_THROWS_AS(make_family("random-decay", window, params), ValidationError);
    CHECK_THROWS_AS(make_family("no-such-family", window, params), ValidationError);
}

TEST_CASE("multiplier composition") {
    auto gen = testing::rng(21);
    const FrequencyWindow window(1, 2);
    const SymbolTable sigma = testing::random_multiplier(window, 2, 3, gen);
    const SymbolTable tau = testing::random_multiplier(window, 3, 2, gen);

    SUBCASE("identity is neutral") {
        const SymbolTable composed = compose_multipliers(sigma, make_identity_symbol(window, 3));
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((composed.value(k) - sigma.value(k)).norm() <= 1e-15);
        }
    }

    SUBCASE("diagonal composition is entrywise") {
        std::vector<Vector> da, db;
        for (Index k = 0; k < window.size(); ++k) {
            Vector u(2), v(2);
            u << Complex(k + 1.0, 0), Complex(0, k - 2.0);
            v << Complex(2.0, static_cast<double>(k)), Complex(1.0, 0);
            da.push_back(u);
            db.push_back(v);
        }
        const SymbolTable left = make_diagonal_symbol(window, da, TailSpec::undeclared);
        const SymbolTable right = make_diagonal_symbol(window, db, TailSpec::undeclared);
        const SymbolTable product = compose_multipliers(left, right);
        for (Index k = 0; k < window.size(); ++k) {
            for (Index i = 0; i < 2; ++i) {
                CHECK(std::abs(product.value(k)(i, i) - da[static_cast<std::size_t>(k)](i) *
                                                            db[static_cast<std::size_t>(k)](i)) <=
                      1e-15);
            }
        }
    }

    SUBCASE("dense-matrix oracle") {
        const SymbolTable composed = compose_multipliers(sigma, tau);
        const Matrix direct = assemble_matrix(composed).matrix;
        const Matrix product = assemble_matrix(sigma).matrix * assemble_matrix(tau).matrix;
        CHECK(testing::relative_error(direct, product) <= 1e-12);
    }

    SUBCASE("associativity per frequency") {
        const SymbolTable rho = testing::random_multiplier(window, 2, 2, gen);
        const SymbolTable left = compose_multipliers(compose_multipliers(sigma, tau), rho);
        const SymbolTable right = compose_multipliers(sigma, compose_multipliers(tau, rho));
        for (Index k = 0; k < window.size(); ++k) {
            CHECK(testing::relative_error(left.value(k), right.value(k)) <= 1e-12);
        }
    }

    CHECK_THROWS_AS(compose_multipliers(sigma, sigma), ValidationError);
}

TEST_CASE("adjoint multiplier") {
    auto gen = testing::rng(33);
    const FrequencyWindow window(1, 2);
    const SymbolTable sigma = testing::random_multiplier(window, 2, 3, gen);

    const SymbolTable adj = adjoint_multiplier(sigma);
    CHECK(adj.dim_out() == 3);
    CHECK(adj.dim_in() == 2);

    SUBCASE("hermitian diagonals are fixed points") {
        std::vector<Vector> diag;
        for (Index k = 0; k < window.size(); ++k) {
            Vector v(2);
            v << Complex(1.5, 0), Complex(-0.25, 0);
            diag.push_back(v);
        }
        const SymbolTable herm = make_diagonal_symbol(window, diag, TailSpec::undeclared);
        const SymbolTable star = adjoint_multiplier(herm);
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((star.value(k) - herm.value(k)).norm() <= 1e-15);
        }
    }

    SUBCASE("involution") {
        const SymbolTable twice = adjoint_multiplier(adj);
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((twice.value(k) - sigma.value(k)).norm() == 0.0);
        }
    }

    SUBCASE("dense oracle: adjoint of the assembled matrix") {
        const Matrix assembled_adj = assemble_matrix(adj).matrix;
        const Matrix adj_assembled = assemble_matrix(sigma).matrix.adjoint();
        CHECK((assembled_adj - adj_assembled).norm() <= 1e-14);
    }

    SUBCASE("contravariance (sigma tau)* = tau* sigma*") {
        const SymbolTable tau = testing::random_multiplier(window, 3, 2, gen);
        const SymbolTable left = adjoint_multiplier(compose_multipliers(sigma, tau));
        const SymbolTable right =
            compose_multipliers(adjoint_multiplier(tau), adjoint_multiplier(sigma));
        for (Index k = 0; k < window.size(); ++k) {
            CHECK(testing::relative_error(left.value(k), right.value(k)) <= 1e-12);
        }
    }
}

TEST_CASE("resolvent symbol") {
    const FrequencyWindow window(1, 2);

    SUBCASE("zero symbol") {
        std::vector<Matrix> zeros(static_cast<std::size_t>(window.size()),
                                  Matrix(Matrix::Zero(2, 2)));
        const SymbolTable zero(window, 2, 2, zeros, TailSpec::zero);
        const SymbolTable res = resolvent_symbol(zero, Complex(2.0, 0.0));
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((res.value(k) - 0.5 * Matrix::Identity(2, 2)).norm() <= 1e-14);
        }
    }

    SUBCASE("residual check on random symbols") {
        auto gen = testing::rng(8);
        const SymbolTable sigma = testing::random_multiplier(window, 3, 3, gen);
        const Complex lambda(7.5, 1.0);
        const SymbolTable res = resolvent_symbol(sigma, lambda);
        for (Index k = 0; k < window.size(); ++k) {
            const Matrix residual =
                (lambda * Matrix::Identity(3, 3) - sigma.value(k)) * res.value(k) -
                Matrix::Identity(3, 3);
            CHECK(residual.norm() <= 1e-12);
        }
    }

    SUBCASE("resolvent identity") {
        auto gen = testing::rng(9);
        const SymbolTable sigma = testing::random_multiplier(window, 3, 3, gen);
        const Complex lambda(6.0, 2.0);
        const Complex mu(-5.0, 1.0);
        const SymbolTable r_lambda = resolvent_symbol(sigma, lambda);
        const SymbolTable r_mu = resolvent_symbol(sigma, mu);
        for (Index k = 0; k < window.size(); ++k) {
            const Matrix lhs = r_lambda.value(k) - r_mu.value(k);
            const Matrix rhs = (mu - lambda) * r_lambda.value(k) * r_mu.value(k);
            CHECK((lhs - rhs).norm() <= 1e-10);
        }
    }

    SUBCASE("spectral point is rejected and names the frequency") {
        std::vector<Vector> diag;
        for (Index k = 0; k < window.size(); ++k) {
            Vector v(2);
            v << Complex(static_cast<double>(k), 0), Complex(k + 0.5, 0);
            diag.push_back(v);
        }
        // lambda = 2 hits the diagonal entry at window position 2, frequency (0)
        const SymbolTable sigma = make_diagonal_symbol(window, diag, TailSpec::undeclared);
        CHECK_THROWS_WITH_AS(resolvent_symbol(sigma, Complex(2.0, 0.0)),
                             doctest::Contains("eta = (0)"), ContractError);
    }
}

TEST_CASE("heat symbols") {
    const FrequencyWindow window(1, 2);

    SUBCASE("scalar case") {
        const Complex c(1.0, -2.0);
        std::vector<Matrix> values(static_cast<std::size_t>(window.size()),
                                   Matrix(c * Matrix::Identity(2, 2)));
        const SymbolTable sigma(window, 2, 2, values, TailSpec::invertible_identity_like);
        const auto [a, b] = heat_symbols(sigma, 0.3);
        const double expected = std::exp(-0.3 * std::norm(c));
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((a.value(k) - expected * Matrix::Identity(2, 2)).norm() <= 1e-13);
            CHECK((b.value(k) - expected * Matrix::Identity(2, 2)).norm() <= 1e-13);
        }
    }

    SUBCASE("t = 0 gives exact identities, negative t is rejected") {
        auto gen = testing::rng(4);
        const SymbolTable sigma = testing::random_multiplier(window, 2, 2, gen);
        const auto [a, b] = heat_symbols(sigma, 0.0);
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((a.value(k) - Matrix::Identity(2, 2)).norm() == 0.0);
            CHECK((b.value(k) - Matrix::Identity(2, 2)).norm() == 0.0);
        }
        CHECK_THROWS_AS(heat_symbols(sigma, -1.0), ValidationError);
    }

    SUBCASE("matches the scaling-and-squaring oracle") {
        auto gen = testing::rng(14);
        const SymbolTable sigma = testing::random_multiplier(window, 3, 3, gen);
        for (double t : {0.05, 0.7, 3.0}) {
            const auto [a, b] = heat_symbols(sigma, t);
            for (Index k = 0; k < window.size(); ++k) {
                const Matrix s = sigma.value(k);
                const Matrix oracle_a =
                    testing::exp_scaling_squaring(Matrix(-t * (s.adjoint() * s)));
                const Matrix oracle_b =
                    testing::exp_scaling_squaring(Matrix(-t * (s * s.adjoint())));
                CHECK(testing::relative_error(a.value(k), oracle_a) <= 1e-11);
                CHECK(testing::relative_error(b.value(k), oracle_b) <= 1e-11);
            }
        }
    }

    SUBCASE("semigroup property and spectral norm bound") {
        auto gen = testing::rng(15);
        const SymbolTable sigma = testing::random_multiplier(window, 3, 3, gen);
        const double t = 0.4;
        const double s = 1.1;
        const auto [at, bt] = heat_symbols(sigma, t);
        const auto [as_, bs] = heat_symbols(sigma, s);
        const auto [ats, bts] = heat_symbols(sigma, t + s);
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((ats.value(k) - at.value(k) * as_.value(k)).norm() <= 1e-10);

            Eigen::SelfAdjointEigenSolver<Matrix> es(
                Matrix(sigma.value(k).adjoint() * sigma.value(k)));
            const double lambda_min = es.eigenvalues().minCoeff();
            const double op_norm = Eigen::JacobiSVD<Matrix>(at.value(k)).singularValues()(0);
            CHECK(op_norm <= std::exp(-t * lambda_min) + 1e-12);
        }
    }
}

TEST_CASE("hoermander realization") {
    const TorusGrid y_grid(1, 13);
    const FrequencyWindow xi_window(1, 2);
    const FrequencyWindow eta_window(1, 3);

    SUBCASE("y-independent bracket is diagonal") {
        const ScalarBisymbol b =
            make_bisymbol_family("bracket", y_grid, xi_window, eta_window, 1.0);
        const SymbolTable a = hoermander_realize(b);
        CHECK(a.dim_in() == eta_window.size());
        for (Index k = 0; k < xi_window.size(); ++k) {
            const auto xi = xi_window.frequency(k);
            for (Index r = 0; r < eta_window.size(); ++r) {
                for (Index c = 0; c < eta_window.size(); ++c) {
                    const Complex expected =
                        r == c ? Complex(japanese_bracket(xi, eta_window.frequency(c)), 0.0)
                               : Complex(0.0, 0.0);
                    CHECK(std::abs(a.value(k)(r, c) - expected) <= 1e-12);
                }
            }
        }
        CHECK(a.fiber_index_norms()[0] == doctest::Approx(3.0));  // labels carry |eta|
    }

    SUBCASE("a single y mode produces one shifted band") {
        const int shift = 2;
        const ScalarBisymbol b = ScalarBisymbol::from_function(
            y_grid, xi_window, eta_window, 1.0, 1.0, 0.0,
            [shift](std::span<const double> y, std::span<const int> xi,
                    std::span<const int> eta) {
                const double angle = 2.0 * std::numbers::pi * shift * y[0];
                return Complex(std::cos(angle), std::sin(angle)) * japanese_bracket(xi, eta);
            });
        const SymbolTable a = hoermander_realize(b);
        for (Index k = 0; k < xi_window.size(); ++k) {
            for (Index r = 0; r < eta_window.size(); ++r) {
                for (Index c = 0; c < eta_window.size(); ++c) {
                    const int offset = eta_window.frequency(r)[0] - eta_window.frequency(c)[0];
                    if (offset != shift) {
                        CHECK(std::abs(a.value(k)(r, c)) <= 1e-12);
                    } else {
                        CHECK(std::abs(a.value(k)(r, c)) > 0.5);
                    }
                }
            }
        }
    }

    SUBCASE("action matches the direct double sum") {
        auto gen = testing::rng(77);
        const ScalarBisymbol b =
            make_bisymbol_family("bracket-cos", y_grid, xi_window, eta_window, 1.0);
        const SymbolTable a = hoermander_realize(b);
        for (Index k = 0; k < xi_window.size(); ++k) {
            Vector ghat(eta_window.size());
            for (Index i = 0; i < ghat.size(); ++i) ghat(i) = testing::random_complex(gen);

            // direct double sum: u(y_j) = sum_eta exp(2 pi i y_j.eta) b(y_j, xi, eta) ghat(eta)
            Matrix action(1, y_grid.size());
            const auto roots = unit_roots(y_grid.samples_per_axis());
            for (Index j = 0; j < y_grid.size(); ++j) {
                Complex acc(0.0, 0.0);
                for (Index e = 0; e < eta_window.size(); ++e) {
                    acc += roots[static_cast<std::size_t>(
                               y_grid.dot_mod(j, eta_window.frequency(e)))] *
                           b.value(j, k, e) * ghat(e);
                }
                action(0, j) = acc;
            }
            const auto action_hat = forward_vft(VectorField(y_grid, action), eta_window);
            const Vector matrix_path = a.value(k) * ghat;
            for (Index e = 0; e < eta_window.size(); ++e) {
                CHECK(std::abs(action_hat.values()(0, e) - matrix_path(e)) <= 1e-12);
            }
        }
    }

    SUBCASE("coarse y grids are rejected") {
        const TorusGrid coarse(1, 5);
        const ScalarBisymbol b = make_bisymbol_family("bracket", coarse, xi_window, eta_window, 1.0);
        CHECK_THROWS_AS(hoermander_realize(b), ValidationError);
    }
}

TEST_CASE("hoermander bounds report") {
    const TorusGrid y_grid(1, 13);
    const FrequencyWindow xi_window(1, 3);
    const FrequencyWindow eta_window(1, 3);

    SUBCASE("bracket of order one is elliptic with finite constants") {
        const ScalarBisymbol b = make_bisymbol_family("bracket", y_grid, xi_window, eta_window, 1.0);
        const auto report = hoermander_bounds_report(b, 2, 1);
        for (const auto& entry : report.entries) {
            CHECK(std::isfinite(entry.constant));
        }
        CHECK(report.ellipticity_constant >= 1.0 / std::sqrt(2.0));
    }

    SUBCASE("constant bisymbol has unit zeroth constant and vanishing differences") {
        const ScalarBisymbol b =
            make_bisymbol_family("constant", y_grid, xi_window, eta_window, 0.0);
        const auto report = hoermander_bounds_report(b, 1, 1);
        const std::vector<int> zero{0};
        const std::vector<int> one{1};
        CHECK(report.constant_for(zero, zero, zero) == doctest::Approx(1.0));
        CHECK(report.constant_for(zero, one, zero) <= 1e-13);
        CHECK(report.constant_for(zero, zero, one) <= 1e-13);
        CHECK(report.constant_for(one, zero, zero) <= 1e-10);
    }

    SUBCASE("wrong declared order is flagged by growth across window radii") {
        double constants[2];
        int slot = 0;
        for (int radius : {2, 4}) {
            const FrequencyWindow xw(1, radius);
            const FrequencyWindow ew(1, radius);
            const TorusGrid grid(1, 4 * radius + 1);
            // first-order bracket declared as order zero
            const ScalarBisymbol mislabeled =
                make_bisymbol_family("bracket", grid, xw, ew, 1.0, 1.0, 0.0);
            const ScalarBisymbol declared(grid, xw, ew, 0.0, 1.0, 0.0, [&] {
                std::vector<Complex> values;
                for (Index j = 0; j < grid.size(); ++j) {
                    for (Index a = 0; a < xw.size(); ++a) {
                        for (Index e = 0; e < ew.size(); ++e) {
                            values.push_back(mislabeled.value(j, a, e));
                        }
                    }
                }
                return values;
            }());
            const auto report = hoermander_bounds_report(declared, 0, 0);
            const std::vector<int> zero{0};
            constants[slot++] = report.constant_for(zero, zero, zero);
        }
        CHECK(constants[1] > constants[0]);  // unbounded trend under the wrong order
    }
}
