#include "torpsido/io.hpp"

#include "torpsido/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace torpsido {

namespace {

constexpr std::uint16_t kVersion = 1;

enum class Kind : std::uint16_t {
    field = 1,
    coefficients = 2,
    multiplier = 3,
    full_symbol = 4,
    assembled = 5,
    lattice_field = 6,
    bisymbol = 7,
};

void put_u16(std::ostream& out, std::uint16_t v) {
    const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(bytes, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

void put_complex(std::ostream& out, const Complex& v) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char bytes[2];
    in.read(reinterpret_cast<char*>(bytes), 2);
    if (!in) throw ValidationError("binary container: truncated header");
    return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw ValidationError("binary container: truncated header");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

double get_f64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw ValidationError("binary container: truncated payload");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return std::bit_cast<double>(v);
}

Complex get_complex(std::istream& in) {
    const double re = get_f64(in);
    const double im = get_f64(in);
    return {re, im};
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path.string());
    return in;
}

void write_header(std::ostream& out, Kind kind) {
    out.write("TPSD", 4);
    put_u16(out, kVersion);
    put_u16(out, static_cast<std::uint16_t>(kind));
}

Kind read_header(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "TPSD") {
        throw ValidationError("binary container: bad magic");
    }
    const std::uint16_t version = get_u16(in);
    if (version != kVersion) {
        std::ostringstream msg;
        msg << "binary container: unsupported version " << version;
        throw ValidationError(msg.str());
    }
    return static_cast<Kind>(get_u16(in));
}

void expect_kind(Kind got, Kind want, const char* what) {
    if (got != want) {
        throw ValidationError(std::string("binary container: not a ") + what + " file");
    }
}

}  // namespace

void write_field(const std::filesystem::path& path, const VectorField& field) {
    auto out = open_out(path);
    write_header(out, Kind::field);
    put_u32(out, static_cast<std::uint32_t>(field.grid().dim()));
    put_u32(out, static_cast<std::uint32_t>(field.grid().samples_per_axis()));
    put_u32(out, static_cast<std::uint32_t>(field.fiber_dim()));
    for (Index j = 0; j < field.grid().size(); ++j) {
        for (Index i = 0; i < field.fiber_dim(); ++i) put_complex(out, field.samples()(i, j));
    }
}

VectorField read_field(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_kind(read_header(in), Kind::field, "vector field");
    const int n = static_cast<int>(get_u32(in));
    const int M = static_cast<int>(get_u32(in));
    const int d = static_cast<int>(get_u32(in));
    const TorusGrid grid(n, M);
    Matrix samples(d, grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        for (Index i = 0; i < d; ++i) samples(i, j) = get_complex(in);
    }
    return VectorField(grid, std::move(samples));
}

void write_coefficients(const std::filesystem::path& path, const FourierCoefficients& coeffs) {
    auto out = open_out(path);
    write_header(out, Kind::coefficients);
    put_u32(out, static_cast<std::uint32_t>(coeffs.window().dim()));
    put_u32(out, static_cast<std::uint32_t>(coeffs.window().radius()));
    put_u32(out, static_cast<std::uint32_t>(coeffs.fiber_dim()));
    for (Index k = 0; k < coeffs.window().size(); ++k) {
        for (Index i = 0; i < coeffs.fiber_dim(); ++i) put_complex(out, coeffs.values()(i, k));
    }
}

FourierCoefficients read_coefficients(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_kind(read_header(in), Kind::coefficients, "coefficient");
    const int n = static_cast<int>(get_u32(in));
    const int N = static_cast<int>(get_u32(in));
    const int d = static_cast<int>(get_u32(in));
    const FrequencyWindow window(n, N);
    Matrix values(d, window.size());
    for (Index k = 0; k < window.size(); ++k) {
        for (Index i = 0; i < d; ++i) values(i, k) = get_complex(in);
    }
    return FourierCoefficients(window, std::move(values));
}

namespace {

void put_matrix(std::ostream& out, const Matrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) put_complex(out, m(r, c));
    }
}

Matrix get_matrix(std::istream& in, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = get_complex(in);
    }
    return m;
}

std::uint32_t tail_code(TailSpec tail) {
    switch (tail) {
        case TailSpec::invertible_identity_like: return 0;
        case TailSpec::zero: return 1;
        default: return 2;
    }
}

TailSpec tail_from_code(std::uint32_t code) {
    switch (code) {
        case 0: return TailSpec::invertible_identity_like;
        case 1: return TailSpec::zero;
        case 2: return TailSpec::undeclared;
        default: throw ValidationError("binary container: bad tail code");
    }
}

}  // namespace

void write_symbol(const std::filesystem::path& path, const SymbolTable& sigma) {
    auto out = open_out(path);
    if (sigma.is_multiplier()) {
        write_header(out, Kind::multiplier);
        put_u32(out, static_cast<std::uint32_t>(sigma.window().dim()));
        put_u32(out, static_cast<std::uint32_t>(sigma.window().radius()));
        put_u32(out, static_cast<std::uint32_t>(sigma.dim_out()));
        put_u32(out, static_cast<std::uint32_t>(sigma.dim_in()));
        put_u32(out, tail_code(sigma.tail()));
        for (Index k = 0; k < sigma.window().size(); ++k) put_matrix(out, sigma.value(k));
        return;
    }
    write_header(out, Kind::full_symbol);
    put_u32(out, static_cast<std::uint32_t>(sigma.window().dim()));
    put_u32(out, static_cast<std::uint32_t>(sigma.window().radius()));
    put_u32(out, static_cast<std::uint32_t>(sigma.grid().samples_per_axis()));
    put_u32(out, static_cast<std::uint32_t>(sigma.dim_out()));
    put_u32(out, static_cast<std::uint32_t>(sigma.dim_in()));
    put_u32(out, tail_code(sigma.tail()));
    for (Index j = 0; j < sigma.grid().size(); ++j) {
        for (Index k = 0; k < sigma.window().size(); ++k) put_matrix(out, sigma.value(j, k));
    }
}

SymbolTable read_symbol(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Kind kind = read_header(in);
    if (kind == Kind::multiplier) {
        const int n = static_cast<int>(get_u32(in));
        const int N = static_cast<int>(get_u32(in));
        const int d_out = static_cast<int>(get_u32(in));
        const int d_in = static_cast<int>(get_u32(in));
        const TailSpec tail = tail_from_code(get_u32(in));
        const FrequencyWindow window(n, N);
        std::vector<Matrix> values;
        values.reserve(static_cast<std::size_t>(window.size()));
        for (Index k = 0; k < window.size(); ++k) values.push_back(get_matrix(in, d_out, d_in));
        return SymbolTable(window, d_out, d_in, std::move(values), tail);
    }
    expect_kind(kind, Kind::full_symbol, "symbol");
    const int n = static_cast<int>(get_u32(in));
    const int N = static_cast<int>(get_u32(in));
    const int M = static_cast<int>(get_u32(in));
    const int d_out = static_cast<int>(get_u32(in));
    const int d_in = static_cast<int>(get_u32(in));
    const TailSpec tail = tail_from_code(get_u32(in));
    const FrequencyWindow window(n, N);
    const TorusGrid grid(n, M);
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(grid.size() * window.size()));
    for (Index j = 0; j < grid.size(); ++j) {
        for (Index k = 0; k < window.size(); ++k) values.push_back(get_matrix(in, d_out, d_in));
    }
    return SymbolTable(grid, window, d_out, d_in, std::move(values), tail);
}

void write_assembled(const std::filesystem::path& path, const AssembledOperator& op) {
    auto out = open_out(path);
    write_header(out, Kind::assembled);
    put_u32(out, static_cast<std::uint32_t>(op.window.dim()));
    put_u32(out, static_cast<std::uint32_t>(op.window.radius()));
    put_u32(out, static_cast<std::uint32_t>(op.dim_out));
    put_u32(out, static_cast<std::uint32_t>(op.dim_in));
    put_matrix(out, op.matrix);
}

AssembledOperator read_assembled(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_kind(read_header(in), Kind::assembled, "assembled operator");
    const int n = static_cast<int>(get_u32(in));
    const int N = static_cast<int>(get_u32(in));
    const int d_out = static_cast<int>(get_u32(in));
    const int d_in = static_cast<int>(get_u32(in));
    const FrequencyWindow window(n, N);
    Matrix m = get_matrix(in, window.size() * d_out, window.size() * d_in);
    return AssembledOperator{window, d_out, d_in, std::move(m)};
}

void write_lattice_field(const std::filesystem::path& path, const LatticeField& field) {
    auto out = open_out(path);
    write_header(out, Kind::lattice_field);
    put_u32(out, static_cast<std::uint32_t>(field.support().dim()));
    put_u32(out, static_cast<std::uint32_t>(field.support().radius()));
    put_u32(out, static_cast<std::uint32_t>(field.fiber_dim()));
    for (Index k = 0; k < field.support().size(); ++k) {
        for (Index i = 0; i < field.fiber_dim(); ++i) put_complex(out, field.values()(i, k));
    }
}

LatticeField read_lattice_field(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_kind(read_header(in), Kind::lattice_field, "lattice field");
    const int n = static_cast<int>(get_u32(in));
    const int N = static_cast<int>(get_u32(in));
    const int d = static_cast<int>(get_u32(in));
    const FrequencyWindow support(n, N);
    Matrix values(d, support.size());
    for (Index k = 0; k < support.size(); ++k) {
        for (Index i = 0; i < d; ++i) values(i, k) = get_complex(in);
    }
    return LatticeField(support, std::move(values));
}

void write_bisymbol(const std::filesystem::path& path, const ScalarBisymbol& b) {
    auto out = open_out(path);
    write_header(out, Kind::bisymbol);
    put_u32(out, static_cast<std::uint32_t>(b.xi_window().dim()));
    put_u32(out, static_cast<std::uint32_t>(b.eta_window().dim()));
    put_u32(out, static_cast<std::uint32_t>(b.xi_window().radius()));
    put_u32(out, static_cast<std::uint32_t>(b.eta_window().radius()));
    put_u32(out, static_cast<std::uint32_t>(b.y_grid().samples_per_axis()));
    put_f64(out, b.order());
    put_f64(out, b.rho());
    put_f64(out, b.delta());
    for (Index j = 0; j < b.y_grid().size(); ++j) {
        for (Index a = 0; a < b.xi_window().size(); ++a) {
            for (Index e = 0; e < b.eta_window().size(); ++e) put_complex(out, b.value(j, a, e));
        }
    }
}

ScalarBisymbol read_bisymbol(const std::filesystem::path& path) {
    auto in = open_in(path);
    expect_kind(read_header(in), Kind::bisymbol, "bisymbol");
    const int n = static_cast<int>(get_u32(in));
    const int m = static_cast<int>(get_u32(in));
    const int n_xi = static_cast<int>(get_u32(in));
    const int n_eta = static_cast<int>(get_u32(in));
    const int my = static_cast<int>(get_u32(in));
    const double order = get_f64(in);
    const double rho = get_f64(in);
    const double delta = get_f64(in);
    const TorusGrid y_grid(m, my);
    const FrequencyWindow xi_window(n, n_xi);
    const FrequencyWindow eta_window(m, n_eta);
    std::vector<Complex> values;
    values.reserve(static_cast<std::size_t>(y_grid.size()) * xi_window.size() *
                   eta_window.size());
    for (Index j = 0; j < y_grid.size(); ++j) {
        for (Index a = 0; a < xi_window.size(); ++a) {
            for (Index e = 0; e < eta_window.size(); ++e) values.push_back(get_complex(in));
        }
    }
    return ScalarBisymbol(y_grid, xi_window, eta_window, order, rho, delta, std::move(values));
}

std::filesystem::path write_decomposition(const std::filesystem::path& prefix,
                                          const NuclearDecomposition& dec) {
    nlohmann::json manifest;
    manifest["terms"] = dec.terms();
    manifest["p"] = dec.p();
    manifest["s"] = dec.s();
    manifest["dim_out"] = dec.dim_out();
    manifest["dim_in"] = dec.dim_in();
    manifest["summability"] = dec.summability();
    manifest["grid"] = {{"n", dec.grid().dim()}, {"M", dec.grid().samples_per_axis()}};
    const std::string stem = prefix.filename().string();
    nlohmann::json files = nlohmann::json::array();
    for (Index k = 0; k < dec.terms(); ++k) {
        std::ostringstream hname, gname;
        hname << stem << "-h" << k << ".tpsd";
        gname << stem << "-g" << k << ".tpsd";
        write_field(prefix.parent_path() / hname.str(),
                    dec.out_factors()[static_cast<std::size_t>(k)]);
        write_field(prefix.parent_path() / gname.str(),
                    dec.in_factors()[static_cast<std::size_t>(k)]);
        files.push_back({{"h", hname.str()}, {"g", gname.str()}});
    }
    manifest["files"] = files;
    const auto manifest_path =
        prefix.parent_path() / (prefix.filename().string() + "-manifest.json");
    std::ofstream out(manifest_path);
    if (!out) throw ValidationError("cannot open for writing: " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

NuclearDecomposition read_decomposition(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot open for reading: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& err) {
        throw ValidationError(std::string("decomposition manifest does not parse: ") + err.what());
    }
    std::vector<VectorField> out_factors;
    std::vector<VectorField> in_factors;
    for (const auto& entry : manifest.at("files")) {
        out_factors.push_back(
            read_field(manifest_path.parent_path() / entry.at("h").get<std::string>()));
        in_factors.push_back(
            read_field(manifest_path.parent_path() / entry.at("g").get<std::string>()));
    }
    const TorusGrid grid(manifest.at("grid").at("n").get<int>(),
                         manifest.at("grid").at("M").get<int>());
    return NuclearDecomposition(grid, manifest.at("dim_out").get<int>(),
                                manifest.at("dim_in").get<int>(), manifest.at("p").get<double>(),
                                manifest.at("s").get<double>(), std::move(out_factors),
                                std::move(in_factors));
}

namespace {

std::ofstream open_text(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    out.precision(17);
    return out;
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const VectorField& field) {
    auto out = open_text(path);
    for (int a = 0; a < field.grid().dim(); ++a) out << "j" << a + 1 << ",";
    for (int i = 0; i < field.fiber_dim(); ++i) {
        out << "re" << i << ",im" << i << (i + 1 < field.fiber_dim() ? "," : "");
    }
    out << "\n";
    for (Index j = 0; j < field.grid().size(); ++j) {
        const auto idx = field.grid().point(j);
        for (int a = 0; a < field.grid().dim(); ++a) out << idx[static_cast<std::size_t>(a)] << ",";
        for (Index i = 0; i < field.fiber_dim(); ++i) {
            out << field.samples()(i, j).real() << "," << field.samples()(i, j).imag()
                << (i + 1 < field.fiber_dim() ? "," : "");
        }
        out << "\n";
    }
}

void write_coefficients_csv(const std::filesystem::path& path, const FourierCoefficients& coeffs) {
    auto out = open_text(path);
    for (int a = 0; a < coeffs.window().dim(); ++a) out << "xi" << a + 1 << ",";
    for (Index i = 0; i < coeffs.fiber_dim(); ++i) {
        out << "re" << i << ",im" << i << (i + 1 < coeffs.fiber_dim() ? "," : "");
    }
    out << "\n";
    for (Index k = 0; k < coeffs.window().size(); ++k) {
        const auto xi = coeffs.window().frequency(k);
        for (int a = 0; a < coeffs.window().dim(); ++a) out << xi[a] << ",";
        for (Index i = 0; i < coeffs.fiber_dim(); ++i) {
            out << coeffs.values()(i, k).real() << "," << coeffs.values()(i, k).imag()
                << (i + 1 < coeffs.fiber_dim() ? "," : "");
        }
        out << "\n";
    }
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& m, bool coordinate) {
    auto out = open_text(path);
    if (coordinate) {
        Index nonzeros = 0;
        for (Index c = 0; c < m.cols(); ++c) {
            for (Index r = 0; r < m.rows(); ++r) {
                if (m(r, c) != Complex(0.0, 0.0)) ++nonzeros;
            }
        }
        out << "%%MatrixMarket matrix coordinate complex general\n";
        out << m.rows() << " " << m.cols() << " " << nonzeros << "\n";
        for (Index c = 0; c < m.cols(); ++c) {
            for (Index r = 0; r < m.rows(); ++r) {
                if (m(r, c) == Complex(0.0, 0.0)) continue;
                out << r + 1 << " " << c + 1 << " " << m(r, c).real() << " " << m(r, c).imag()
                    << "\n";
            }
        }
        return;
    }
    out << "%%MatrixMarket matrix array complex general\n";
    out << m.rows() << " " << m.cols() << "\n";
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) {
            out << m(r, c).real() << " " << m(r, c).imag() << "\n";
        }
    }
}

}  // namespace torpsido
