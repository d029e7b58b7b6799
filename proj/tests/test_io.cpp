#include "torpsido/io.hpp"

#include "torpsido/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace torpsido;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "torpsido-io-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("binary container roundtrips") {
    auto gen = testing::rng(211);

    SUBCASE("vector field") {
        const TorusGrid grid(2, 5);
        const VectorField field(grid, testing::random_matrix(3, grid.size(), gen));
        const auto path = temp_path("field.tpsd");
        write_field(path, field);
        const VectorField back = read_field(path);
        CHECK(back.grid() == grid);
        CHECK((back.samples() - field.samples()).norm() == 0.0);
    }

    SUBCASE("fourier coefficients") {
        const FrequencyWindow window(1, 4);
        const FourierCoefficients coeffs(window, testing::random_matrix(2, window.size(), gen));
        const auto path = temp_path("coeffs.tpsd");
        write_coefficients(path, coeffs);
        const FourierCoefficients back = read_coefficients(path);
        CHECK((back.values() - coeffs.values()).norm() == 0.0);
    }

    SUBCASE("multiplier and full symbol tables") {
        const FrequencyWindow window(1, 2);
        const SymbolTable mult = testing::random_multiplier(window, 2, 3, gen);
        const auto mpath = temp_path("mult.tpsd");
        write_symbol(mpath, mult);
        const SymbolTable mback = read_symbol(mpath);
        CHECK(mback.is_multiplier());
        CHECK(mback.tail() == mult.tail());
        for (Index k = 0; k < window.size(); ++k) {
            CHECK((mback.value(k) - mult.value(k)).norm() == 0.0);
        }

        const TorusGrid grid(1, 9);
        SymbolFamilyParams params;
        params.dim_in = params.dim_out = 2;
        params.seed = 212;
        params.x_dependent = true;
        const SymbolTable full = make_family("random-decay", window, params, grid);
        const auto fpath = temp_path("full.tpsd");
        write_symbol(fpath, full);
        const SymbolTable fback = read_symbol(fpath);
        CHECK_FALSE(fback.is_multiplier());
        CHECK(fback.grid() == grid);
        for (Index j = 0; j < grid.size(); ++j) {
            for (Index k = 0; k < window.size(); ++k) {
                CHECK((fback.value(j, k) - full.value(j, k)).norm() == 0.0);
            }
        }
    }

    SUBCASE("assembled operator") {
        const FrequencyWindow window(1, 1);
        const SymbolTable sigma = testing::random_multiplier(window, 2, 2, gen);
        const AssembledOperator op = assemble_matrix(sigma);
        const auto path = temp_path("assembled.tpsd");
        write_assembled(path, op);
        const AssembledOperator back = read_assembled(path);
        CHECK((back.matrix - op.matrix).norm() == 0.0);
        CHECK(back.dim_out == op.dim_out);
    }

    SUBCASE("lattice field") {
        const FrequencyWindow support(1, 3);
        const LatticeField field(support, testing::random_matrix(2, support.size(), gen));
        const auto path = temp_path("lattice.tpsd");
        write_lattice_field(path, field);
        const LatticeField back = read_lattice_field(path);
        CHECK((back.values() - field.values()).norm() == 0.0);
    }

    SUBCASE("scalar bisymbol with class parameters") {
        const TorusGrid y_grid(1, 9);
        const FrequencyWindow xi_window(1, 2);
        const FrequencyWindow eta_window(1, 2);
        const ScalarBisymbol b =
            make_bisymbol_family("bracket-cos", y_grid, xi_window, eta_window, 1.5, 0.75, 0.25);
        const auto path = temp_path("bisymbol.tpsd");
        write_bisymbol(path, b);
        const ScalarBisymbol back = read_bisymbol(path);
        CHECK(back.order() == b.order());
        CHECK(back.rho() == b.rho());
        CHECK(back.delta() == b.delta());
        for (Index j = 0; j < y_grid.size(); ++j) {
            for (Index a = 0; a < xi_window.size(); ++a) {
                for (Index e = 0; e < eta_window.size(); ++e) {
                    CHECK(back.value(j, a, e) == b.value(j, a, e));
                }
            }
        }
    }

    SUBCASE("decomposition manifest plus factor containers") {
        const TorusGrid grid(1, 9);
        const FrequencyWindow window(1, 2);
        const auto dec = random_periodic_decomposition(grid, window, 2, 3, 2.0, 1.0, 220);
        const auto manifest = write_decomposition(temp_path("dec"), dec);
        const NuclearDecomposition back = read_decomposition(manifest);
        CHECK(back.terms() == dec.terms());
        CHECK(back.p() == dec.p());
        CHECK(back.s() == dec.s());
        CHECK(back.summability() == doctest::Approx(dec.summability()).epsilon(1e-15));
        for (Index k = 0; k < dec.terms(); ++k) {
            CHECK((back.out_factors()[static_cast<std::size_t>(k)].samples() -
                   dec.out_factors()[static_cast<std::size_t>(k)].samples())
                      .norm() == 0.0);
        }

        const NuclearDecomposition empty(grid, 2, 2, 2.0, 1.0, {}, {});
        const auto empty_manifest = write_decomposition(temp_path("dec-empty"), empty);
        const NuclearDecomposition empty_back = read_decomposition(empty_manifest);
        CHECK(empty_back.terms() == 0);
        CHECK(empty_back.grid() == grid);
    }
}

TEST_CASE("trace reports emit text and json") {
    const FrequencyWindow window(1, 1);
    const TraceReport report = nuclear_trace_pdo(make_identity_symbol(window, 2));
    const std::string text = to_text(report);
    CHECK(text.find("nuclear_trace_re 6") != std::string::npos);
    const std::string json_text = to_json_text(report);
    CHECK(json_text.find("\"discrepancy\"") != std::string::npos);
    CHECK(json_text.find("\"per_frequency\"") != std::string::npos);
}

TEST_CASE("container rejects foreign files") {
    const auto path = temp_path("garbage.tpsd");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE but long enough to have a header";
    }
    CHECK_THROWS_AS(read_field(path), ValidationError);

    // kind mismatch: a coefficients file is not a field file
    const FrequencyWindow window(1, 1);
    auto gen = testing::rng(4);
    const FourierCoefficients coeffs(window, testing::random_matrix(1, window.size(), gen));
    const auto cpath = temp_path("kind.tpsd");
    write_coefficients(cpath, coeffs);
    CHECK_THROWS_AS(read_field(cpath), ValidationError);
}

TEST_CASE("matrix market export") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = Complex(1.5, -2.0);
    m(1, 1) = Complex(0.0, 3.0);

    SUBCASE("array format") {
        const auto path = temp_path("dense.mtx");
        write_matrix_market(path, m);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "%%MatrixMarket matrix array complex general");
        std::string dims;
        std::getline(in, dims);
        CHECK(dims == "2 2");
    }

    SUBCASE("coordinate format keeps only nonzeros") {
        const auto path = temp_path("sparse.mtx");
        write_matrix_market(path, m, true);
        std::ifstream in(path);
        std::string header, dims;
        std::getline(in, header);
        std::getline(in, dims);
        CHECK(header == "%%MatrixMarket matrix coordinate complex general");
        CHECK(dims == "2 2 2");
        std::string line;
        int rows = 0;
        while (std::getline(in, line)) {
            if (!line.empty()) ++rows;
        }
        CHECK(rows == 2);
    }
}

TEST_CASE("csv export writes one row per grid point") {
    auto gen = testing::rng(218);
    const TorusGrid grid(1, 4);
    const VectorField field(grid, testing::random_matrix(2, grid.size(), gen));
    const auto path = temp_path("field.csv");
    write_field_csv(path, field);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 1 + grid.size());
}
