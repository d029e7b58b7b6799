#include "torpsido/symbol.hpp"

#include "torpsido/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace torpsido {

namespace {

std::string freq_string(const FrequencyWindow& window, Index k) {
    std::ostringstream out;
    out << "(";
    const auto xi = window.frequency(k);
    for (int a = 0; a < window.dim(); ++a) {
        if (a) out << ",";
        out << xi[a];
    }
    out << ")";
    return out.str();
}

std::vector<double> default_fiber_norms(int dim) {
    std::vector<double> norms(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) norms[static_cast<std::size_t>(a)] = a;
    return norms;
}

void check_values(const std::vector<Matrix>& values, std::size_t expected, int dim_out, int dim_in,
                  const char* what) {
    if (values.size() != expected) {
        throw ValidationError(std::string(what) + ": wrong number of value matrices");
    }
    for (const auto& m : values) {
        if (m.rows() != dim_out || m.cols() != dim_in) {
            throw ValidationError(std::string(what) + ": value shape mismatch");
        }
        if (!m.allFinite()) {
            throw ValidationError(std::string(what) + ": non-finite value entries");
        }
    }
}

TailSpec compose_tails(TailSpec a, TailSpec b) {
    if (a == TailSpec::zero || b == TailSpec::zero) return TailSpec::zero;
    if (a == TailSpec::invertible_identity_like && b == TailSpec::invertible_identity_like) {
        return TailSpec::invertible_identity_like;
    }
    return TailSpec::undeclared;
}

}  // namespace

std::string to_string(TailSpec tail) {
    switch (tail) {
        case TailSpec::invertible_identity_like: return "invertible-identity-like";
        case TailSpec::zero: return "zero";
        default: return "undeclared";
    }
}

TailSpec tail_from_string(const std::string& name) {
    if (name == "invertible-identity-like") return TailSpec::invertible_identity_like;
    if (name == "zero") return TailSpec::zero;
    if (name == "undeclared") return TailSpec::undeclared;
    throw ValidationError("unknown tail_spec: " + name);
}

SymbolTable::SymbolTable(FrequencyWindow window, int dim_out, int dim_in,
                         std::vector<Matrix> values, TailSpec tail)
    : grid_(std::nullopt),
      window_(std::move(window)),
      dim_out_(dim_out),
      dim_in_(dim_in),
      tail_(tail),
      values_(std::move(values)),
      fiber_norms_(default_fiber_norms(dim_in)) {
    check_values(values_, static_cast<std::size_t>(window_.size()), dim_out_, dim_in_,
                 "SymbolTable");
    if (tail_ == TailSpec::invertible_identity_like && dim_in_ != dim_out_) {
        throw ValidationError("SymbolTable: invertible-identity-like tail requires square fibers");
    }
}

SymbolTable::SymbolTable(TorusGrid grid, FrequencyWindow window, int dim_out, int dim_in,
                         std::vector<Matrix> values, TailSpec tail)
    : grid_(grid),
      window_(std::move(window)),
      dim_out_(dim_out),
      dim_in_(dim_in),
      tail_(tail),
      values_(std::move(values)),
      fiber_norms_(default_fiber_norms(dim_in)) {
    if (grid.dim() != window_.dim()) {
        throw ValidationError("SymbolTable: grid and window dimensions differ");
    }
    check_values(values_, static_cast<std::size_t>(grid.size() * window_.size()), dim_out_, dim_in_,
                 "SymbolTable");
    if (tail_ == TailSpec::invertible_identity_like && dim_in_ != dim_out_) {
        throw ValidationError("SymbolTable: invertible-identity-like tail requires square fibers");
    }
}

const TorusGrid& SymbolTable::grid() const {
    if (!grid_) throw ValidationError("SymbolTable: multiplier variant has no grid");
    return *grid_;
}

const Matrix& SymbolTable::value(Index freq) const {
    if (!is_multiplier()) {
        throw ValidationError("SymbolTable: x-dependent table needs a grid point index");
    }
    return values_[static_cast<std::size_t>(freq)];
}

const Matrix& SymbolTable::value(Index point, Index freq) const {
    if (is_multiplier()) return values_[static_cast<std::size_t>(freq)];
    return values_[static_cast<std::size_t>(point * window_.size() + freq)];
}

void SymbolTable::set_fiber_index_norms(std::vector<double> norms) {
    if (static_cast<int>(norms.size()) != dim_in_) {
        throw ValidationError("SymbolTable: fiber norm label count mismatch");
    }
    fiber_norms_ = std::move(norms);
}

double japanese_bracket(std::span<const int> xi) {
    double s = 1.0;
    for (int c : xi) s += static_cast<double>(c) * c;
    return std::sqrt(s);
}

double japanese_bracket(std::span<const int> xi, std::span<const int> eta) {
    double s = 1.0;
    for (int c : xi) s += static_cast<double>(c) * c;
    for (int c : eta) s += static_cast<double>(c) * c;
    return std::sqrt(s);
}

SymbolTable make_identity_symbol(const FrequencyWindow& window, int dim) {
    std::vector<Matrix> values(static_cast<std::size_t>(window.size()),
                               Matrix::Identity(dim, dim));
    return SymbolTable(window, dim, dim, std::move(values), TailSpec::invertible_identity_like);
}

SymbolTable make_bessel_symbol(const FrequencyWindow& window, int dim, double order) {
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(window.size()));
    for (Index k = 0; k < window.size(); ++k) {
        values.push_back(std::pow(japanese_bracket(window.frequency(k)), order) *
                         Matrix::Identity(dim, dim));
    }
    return SymbolTable(window, dim, dim, std::move(values), TailSpec::invertible_identity_like);
}

SymbolTable make_diagonal_symbol(const FrequencyWindow& window, std::vector<Vector> diagonal,
                                 TailSpec tail) {
    if (static_cast<Index>(diagonal.size()) != window.size()) {
        throw ValidationError("make_diagonal_symbol: one diagonal per window frequency required");
    }
    const Index dim = diagonal.front().size();
    std::vector<Matrix> values;
    values.reserve(diagonal.size());
    for (const auto& d : diagonal) {
        if (d.size() != dim) throw ValidationError("make_diagonal_symbol: ragged diagonals");
        values.push_back(Matrix(d.asDiagonal()));
    }
    return SymbolTable(window, static_cast<int>(dim), static_cast<int>(dim), std::move(values),
                       tail);
}

namespace {

Matrix random_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            out(i, j) = Complex(re, im);
        }
    }
    return out;
}

SymbolTable make_random_decay_multiplier(const FrequencyWindow& window, int dim_out, int dim_in,
                                         double decay, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(window.size()));
    for (Index k = 0; k < window.size(); ++k) {
        const double envelope = std::pow(japanese_bracket(window.frequency(k)), -decay);
        values.push_back(envelope * random_gaussian(dim_out, dim_in, rng));
    }
    return SymbolTable(window, dim_out, dim_in, std::move(values), TailSpec::zero);
}

// x-dependent variant: draws x-Fourier modes on the window radius so the
// table stays band-limited in x; samples are synthesized on the grid.
SymbolTable make_random_decay_full(const TorusGrid& grid, const FrequencyWindow& window,
                                   int dim_out, int dim_in, double decay, std::uint64_t seed) {
    if (grid.samples_per_axis() < 4 * window.radius() + 1) {
        throw ValidationError("random-decay: x-dependent family needs a grid with M >= 4N+1");
    }
    std::mt19937_64 rng(seed);
    const FrequencyWindow xmodes(window.dim(), window.radius());
    // coefficients c[kappa][eta]
    std::vector<std::vector<Matrix>> coeff(static_cast<std::size_t>(xmodes.size()));
    for (Index kk = 0; kk < xmodes.size(); ++kk) {
        auto& per_eta = coeff[static_cast<std::size_t>(kk)];
        per_eta.reserve(static_cast<std::size_t>(window.size()));
        const double smooth = std::pow(japanese_bracket(xmodes.frequency(kk)), -2.0);
        for (Index k = 0; k < window.size(); ++k) {
            const double envelope = std::pow(japanese_bracket(window.frequency(k)), -decay);
            per_eta.push_back(smooth * envelope * random_gaussian(dim_out, dim_in, rng));
        }
    }
    const auto roots = unit_roots(grid.samples_per_axis());
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(grid.size() * window.size()));
    for (Index j = 0; j < grid.size(); ++j) {
        for (Index k = 0; k < window.size(); ++k) {
            Matrix acc = Matrix::Zero(dim_out, dim_in);
            for (Index kk = 0; kk < xmodes.size(); ++kk) {
                const int r = grid.dot_mod(j, xmodes.frequency(kk));
                acc += roots[static_cast<std::size_t>(r)] * coeff[static_cast<std::size_t>(kk)]
                                                                 [static_cast<std::size_t>(k)];
            }
            values.push_back(std::move(acc));
        }
    }
    return SymbolTable(grid, window, dim_out, dim_in, std::move(values), TailSpec::zero);
}

// Full-rank rectangular values: Gaussian draw with singular values clamped
// from below so every block keeps rank min(d_out, d_in).
SymbolTable make_rectangular_symbol(const FrequencyWindow& window, int dim_out, int dim_in,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(window.size()));
    for (Index k = 0; k < window.size(); ++k) {
        Matrix g = random_gaussian(dim_out, dim_in, rng);
        Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::VectorXd s = svd.singularValues();
        for (Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i), 1.0);
        Matrix clamped = Matrix::Zero(dim_out, dim_in);
        clamped.topLeftCorner(s.size(), s.size()) = s.cast<Complex>().asDiagonal();
        values.push_back(svd.matrixU() * clamped * svd.matrixV().adjoint());
    }
    return SymbolTable(window, dim_out, dim_in, std::move(values), TailSpec::zero);
}

}  // namespace

SymbolTable make_family(const std::string& name, const FrequencyWindow& window,
                        const SymbolFamilyParams& params, const std::optional<TorusGrid>& grid) {
    auto with_tail = [&params](SymbolTable table, TailSpec fallback) {
        if (!params.tail) return table;
        if (*params.tail == fallback || table.tail() == *params.tail) return table;
        if (table.is_multiplier()) {
            std::vector<Matrix> values;
            values.reserve(static_cast<std::size_t>(table.window().size()));
            for (Index k = 0; k < table.window().size(); ++k) values.push_back(table.value(k));
            SymbolTable out(table.window(), table.dim_out(), table.dim_in(), std::move(values),
                            *params.tail);
            out.set_fiber_index_norms(table.fiber_index_norms());
            return out;
        }
        std::vector<Matrix> values;
        values.reserve(static_cast<std::size_t>(table.grid().size() * table.window().size()));
        for (Index j = 0; j < table.grid().size(); ++j) {
            for (Index k = 0; k < table.window().size(); ++k) values.push_back(table.value(j, k));
        }
        return SymbolTable(table.grid(), table.window(), table.dim_out(), table.dim_in(),
                           std::move(values), *params.tail);
    };

    if (name == "identity") {
        return with_tail(make_identity_symbol(window, params.dim_in),
                         TailSpec::invertible_identity_like);
    }
    if (name == "bessel") {
        return with_tail(make_bessel_symbol(window, params.dim_in, params.order),
                         TailSpec::invertible_identity_like);
    }
    if (name == "diagonal") {
        if (!params.diagonal) {
            throw ValidationError("diagonal family: per-frequency eigenvalues required");
        }
        return make_diagonal_symbol(window, *params.diagonal,
                                    params.tail.value_or(TailSpec::undeclared));
    }
    if (name == "random-decay") {
        if (!params.seed) throw ValidationError("random-decay family: seed required");
        if (params.decay < 0) throw ValidationError("random-decay family: invalid decay exponent");
        if (params.x_dependent) {
            if (!grid) throw ValidationError("random-decay family: x-dependent variant needs a grid");
            return with_tail(make_random_decay_full(*grid, window, params.dim_out, params.dim_in,
                                                    params.decay, *params.seed),
                             TailSpec::zero);
        }
        return with_tail(make_random_decay_multiplier(window, params.dim_out, params.dim_in,
                                                      params.decay, *params.seed),
                         TailSpec::zero);
    }
    if (name == "rectangular") {
        if (!params.seed) throw ValidationError("rectangular family: seed required");
        return with_tail(make_rectangular_symbol(window, params.dim_out, params.dim_in,
                                                 *params.seed),
                         TailSpec::zero);
    }
    throw ValidationError("unknown symbol family: " + name);
}

SymbolTable compose_multipliers(const SymbolTable& sigma, const SymbolTable& tau) {
    if (!sigma.is_multiplier() || !tau.is_multiplier()) {
        throw ValidationError("compose_multipliers: both symbols must be multipliers");
    }
    if (!(sigma.window() == tau.window())) {
        throw ValidationError("compose_multipliers: window mismatch");
    }
    if (sigma.dim_in() != tau.dim_out()) {
        throw ValidationError("compose_multipliers: inner fiber dimensions differ");
    }
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        values.push_back(sigma.value(k) * tau.value(k));
    }
    SymbolTable out(sigma.window(), sigma.dim_out(), tau.dim_in(), std::move(values),
                    compose_tails(sigma.tail(), tau.tail()));
    out.set_fiber_index_norms(tau.fiber_index_norms());
    return out;
}

SymbolTable adjoint_multiplier(const SymbolTable& sigma) {
    if (!sigma.is_multiplier()) {
        throw ValidationError(
            "adjoint_multiplier: unsupported for x-dependent symbols (multiplier calculus only)");
    }
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        values.push_back(sigma.value(k).adjoint());
    }
    return SymbolTable(sigma.window(), sigma.dim_in(), sigma.dim_out(), std::move(values),
                       sigma.tail());
}

SymbolTable resolvent_symbol(const SymbolTable& sigma, Complex lambda, double rel_tol) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("resolvent_symbol: multiplier variant required");
    }
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("resolvent_symbol: square fibers required");
    }
    const int d = sigma.dim_in();
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const Matrix shifted = lambda * Matrix::Identity(d, d) - sigma.value(k);
        Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (smin <= rel_tol * smax) {
            std::ostringstream msg;
            msg << "resolvent_symbol: lambda - sigma(eta) is singular at eta = "
                << freq_string(sigma.window(), k) << " (smallest singular value " << smin << ")";
            throw ContractError(msg.str());
        }
        Vector inv = svd.singularValues().cast<Complex>();
        for (Index i = 0; i < inv.size(); ++i) inv(i) = 1.0 / inv(i);
        values.push_back(svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint());
    }
    return SymbolTable(sigma.window(), d, d, std::move(values), TailSpec::undeclared);
}

Matrix hermitian_semigroup_exp(const Matrix& hermitian, double t) {
    const Matrix sym = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const Eigen::VectorXd decay = (-t * es.eigenvalues().array()).exp();
    return es.eigenvectors() * decay.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

std::pair<SymbolTable, SymbolTable> heat_symbols(const SymbolTable& sigma, double t) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("heat_symbols: multiplier variant required");
    }
    if (t < 0) throw ValidationError("heat_symbols: t must be nonnegative");
    const TailSpec tail = sigma.tail() == TailSpec::undeclared
                              ? TailSpec::undeclared
                              : TailSpec::invertible_identity_like;
    std::vector<Matrix> source_side;
    std::vector<Matrix> target_side;
    source_side.reserve(static_cast<std::size_t>(sigma.window().size()));
    target_side.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const Matrix& s = sigma.value(k);
        if (t == 0.0) {
            source_side.push_back(Matrix::Identity(sigma.dim_in(), sigma.dim_in()));
            target_side.push_back(Matrix::Identity(sigma.dim_out(), sigma.dim_out()));
            continue;
        }
        source_side.push_back(hermitian_semigroup_exp(s.adjoint() * s, t));
        target_side.push_back(hermitian_semigroup_exp(s * s.adjoint(), t));
    }
    SymbolTable a(sigma.window(), sigma.dim_in(), sigma.dim_in(), std::move(source_side), tail);
    a.set_fiber_index_norms(sigma.fiber_index_norms());
    SymbolTable b(sigma.window(), sigma.dim_out(), sigma.dim_out(), std::move(target_side), tail);
    return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// ScalarBisymbol
// ---------------------------------------------------------------------------

ScalarBisymbol::ScalarBisymbol(TorusGrid y_grid, FrequencyWindow xi_window,
                               FrequencyWindow eta_window, double order, double rho, double delta,
                               std::vector<Complex> values)
    : y_grid_(y_grid),
      xi_window_(std::move(xi_window)),
      eta_window_(std::move(eta_window)),
      order_(order),
      rho_(rho),
      delta_(delta),
      values_(std::move(values)) {
    if (y_grid_.dim() != eta_window_.dim()) {
        throw ValidationError("ScalarBisymbol: y grid must match the eta window dimension");
    }
    const auto expected = static_cast<std::size_t>(y_grid_.size()) * xi_window_.size() *
                          eta_window_.size();
    if (values_.size() != expected) {
        throw ValidationError("ScalarBisymbol: value count mismatch");
    }
    for (const Complex& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw ValidationError("ScalarBisymbol: non-finite entries");
        }
    }
}

ScalarBisymbol ScalarBisymbol::from_function(const TorusGrid& y_grid,
                                             const FrequencyWindow& xi_window,
                                             const FrequencyWindow& eta_window, double order,
                                             double rho, double delta, const Evaluator& fn) {
    std::vector<Complex> values;
    values.reserve(static_cast<std::size_t>(y_grid.size()) * xi_window.size() * eta_window.size());
    for (Index j = 0; j < y_grid.size(); ++j) {
        const auto y = y_grid.coordinates(j);
        for (Index a = 0; a < xi_window.size(); ++a) {
            for (Index b = 0; b < eta_window.size(); ++b) {
                values.push_back(fn(y, xi_window.frequency(a), eta_window.frequency(b)));
            }
        }
    }
    return ScalarBisymbol(y_grid, xi_window, eta_window, order, rho, delta, std::move(values));
}

ScalarBisymbol make_bisymbol_family(const std::string& name, const TorusGrid& y_grid,
                                    const FrequencyWindow& xi_window,
                                    const FrequencyWindow& eta_window, double order, double rho,
                                    double delta) {
    const double two_pi = 2.0 * std::numbers::pi;
    if (name == "bracket") {
        return ScalarBisymbol::from_function(
            y_grid, xi_window, eta_window, order, rho, delta,
            [order](std::span<const double>, std::span<const int> xi, std::span<const int> eta) {
                return Complex(std::pow(japanese_bracket(xi, eta), order), 0.0);
            });
    }
    if (name == "bracket-cos") {
        return ScalarBisymbol::from_function(
            y_grid, xi_window, eta_window, order, rho, delta,
            [order, two_pi](std::span<const double> y, std::span<const int> xi,
                            std::span<const int> eta) {
                return Complex((2.0 + std::cos(two_pi * y[0])) *
                                   std::pow(japanese_bracket(xi, eta), order),
                               0.0);
            });
    }
    if (name == "bracket-mixed") {
        return ScalarBisymbol::from_function(
            y_grid, xi_window, eta_window, order, rho, delta,
            [order, two_pi](std::span<const double> y, std::span<const int> xi,
                            std::span<const int> eta) {
                const double modulation =
                    2.0 + 0.5 * std::cos(two_pi * y[0]) + 0.5 * std::sin(2.0 * two_pi * y[0]);
                return Complex(modulation * std::pow(japanese_bracket(xi, eta), order), 0.0);
            });
    }
    if (name == "constant") {
        return ScalarBisymbol::from_function(
            y_grid, xi_window, eta_window, order, rho, delta,
            [](std::span<const double>, std::span<const int>, std::span<const int>) {
                return Complex(1.0, 0.0);
            });
    }
    throw ValidationError("unknown bisymbol family: " + name);
}

SymbolTable hoermander_realize(const ScalarBisymbol& b, TailSpec tail) {
    const TorusGrid& grid = b.y_grid();
    const FrequencyWindow& etas = b.eta_window();
    if (grid.samples_per_axis() < 2 * etas.radius() + 1) {
        throw ValidationError("hoermander_realize: y grid too coarse for the eta window");
    }
    const auto roots = unit_roots(grid.samples_per_axis());
    const Index d = etas.size();
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(b.xi_window().size()));
    std::vector<int> kappa(static_cast<std::size_t>(etas.dim()));
    for (Index a = 0; a < b.xi_window().size(); ++a) {
        Matrix mat(d, d);
        for (Index col = 0; col < d; ++col) {
            const auto eta = etas.frequency(col);
            for (Index row = 0; row < d; ++row) {
                const auto eta_out = etas.frequency(row);
                for (int c = 0; c < etas.dim(); ++c) kappa[static_cast<std::size_t>(c)] = eta_out[c] - eta[c];
                Complex acc(0.0, 0.0);
                for (Index j = 0; j < grid.size(); ++j) {
                    acc += std::conj(roots[static_cast<std::size_t>(grid.dot_mod(j, kappa))]) *
                           b.value(j, a, col);
                }
                mat(row, col) = acc * grid.quadrature_weight();
            }
        }
        values.push_back(std::move(mat));
    }
    SymbolTable out(b.xi_window(), static_cast<int>(d), static_cast<int>(d), std::move(values),
                    tail);
    std::vector<double> norms(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) norms[static_cast<std::size_t>(k)] = etas.euclidean_norm(k);
    out.set_fiber_index_norms(std::move(norms));
    return out;
}

// ---------------------------------------------------------------------------
// Empirical Hoermander-class bounds
// ---------------------------------------------------------------------------

namespace {

void enumerate_multi_indices(int dim, int max_total, std::vector<std::vector<int>>& out) {
    std::vector<int> current(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> recurse = [&](int axis, int remaining) {
        if (axis == dim) {
            out.push_back(current);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            current[static_cast<std::size_t>(axis)] = v;
            recurse(axis + 1, remaining - v);
        }
        current[static_cast<std::size_t>(axis)] = 0;
    };
    recurse(0, max_total);
}

int total_order(std::span<const int> idx) {
    int s = 0;
    for (int v : idx) s += v;
    return s;
}

// Symmetric frequency representatives of the y grid, for spectral derivatives.
std::vector<std::vector<int>> grid_frequencies(const TorusGrid& grid) {
    const int M = grid.samples_per_axis();
    std::vector<std::vector<int>> out(static_cast<std::size_t>(grid.size()));
    for (Index k = 0; k < grid.size(); ++k) {
        auto j = grid.point(k);
        std::vector<int> kappa(j.size());
        for (std::size_t a = 0; a < j.size(); ++a) {
            kappa[a] = j[a] <= (M - 1) / 2 ? j[a] : j[a] - M;
        }
        out[static_cast<std::size_t>(k)] = std::move(kappa);
    }
    return out;
}

}  // namespace

double HoermanderBoundsReport::constant_for(std::span<const int> dy, std::span<const int> dxi,
                                            std::span<const int> deta) const {
    for (const auto& e : entries) {
        if (std::equal(dy.begin(), dy.end(), e.dy.begin(), e.dy.end()) &&
            std::equal(dxi.begin(), dxi.end(), e.dxi.begin(), e.dxi.end()) &&
            std::equal(deta.begin(), deta.end(), e.deta.begin(), e.deta.end())) {
            return e.constant;
        }
    }
    throw ValidationError("HoermanderBoundsReport: no entry for the requested multi-index");
}

HoermanderBoundsReport hoermander_bounds_report(const ScalarBisymbol& b, int alpha_max,
                                                int gamma_max, double m0) {
    if (alpha_max < 0 || alpha_max > 3 || gamma_max < 0 || gamma_max > 3) {
        throw ValidationError("hoermander_bounds_report: caps must lie in [0, 3]");
    }
    const TorusGrid& grid = b.y_grid();
    if (gamma_max > 0 && grid.samples_per_axis() % 2 == 0) {
        throw ValidationError(
            "hoermander_bounds_report: spectral differentiation needs an odd y grid");
    }
    const FrequencyWindow& xis = b.xi_window();
    const FrequencyWindow& etas = b.eta_window();
    const Index P = grid.size();
    const Index Wx = xis.size();
    const Index We = etas.size();

    std::vector<std::vector<int>> gammas, alphas, omegas;
    enumerate_multi_indices(grid.dim(), gamma_max, gammas);
    enumerate_multi_indices(xis.dim(), alpha_max, alphas);
    enumerate_multi_indices(etas.dim(), alpha_max, omegas);

    // y-Fourier coefficients of the base tensor, once.
    const auto roots = unit_roots(grid.samples_per_axis());
    const auto kappas = grid_frequencies(grid);
    std::vector<Complex> bhat(static_cast<std::size_t>(P * Wx * We));
    for (Index q = 0; q < P; ++q) {
        for (Index a = 0; a < Wx; ++a) {
            for (Index e = 0; e < We; ++e) {
                Complex acc(0.0, 0.0);
                for (Index j = 0; j < P; ++j) {
                    acc += std::conj(roots[static_cast<std::size_t>(
                               grid.dot_mod(j, kappas[static_cast<std::size_t>(q)]))]) *
                           b.value(j, a, e);
                }
                bhat[static_cast<std::size_t>((q * Wx + a) * We + e)] =
                    acc * grid.quadrature_weight();
            }
        }
    }

    HoermanderBoundsReport report;
    report.m0 = m0;
    report.order = b.order();
    report.rho = b.rho();
    report.delta = b.delta();

    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Complex> work(static_cast<std::size_t>(P * Wx * We));
    std::vector<Complex> shifted(work.size());
    auto at = [&](std::vector<Complex>& t, Index j, Index a, Index e) -> Complex& {
        return t[static_cast<std::size_t>((j * Wx + a) * We + e)];
    };

    for (const auto& gamma : gammas) {
        // spectral derivative in y: multiply bhat by prod (2 pi i kappa_c)^gamma_c
        for (Index j = 0; j < P; ++j) {
            for (Index a = 0; a < Wx; ++a) {
                for (Index e = 0; e < We; ++e) {
                    Complex acc(0.0, 0.0);
                    for (Index q = 0; q < P; ++q) {
                        Complex weight(1.0, 0.0);
                        const auto& kappa = kappas[static_cast<std::size_t>(q)];
                        for (int c = 0; c < grid.dim(); ++c) {
                            for (int rep = 0; rep < gamma[static_cast<std::size_t>(c)]; ++rep) {
                                weight *= Complex(0.0, two_pi * kappa[static_cast<std::size_t>(c)]);
                            }
                        }
                        acc += weight * bhat[static_cast<std::size_t>((q * Wx + a) * We + e)] *
                               roots[static_cast<std::size_t>(
                                   grid.dot_mod(j, kappas[static_cast<std::size_t>(q)]))];
                    }
                    at(work, j, a, e) = acc;
                }
            }
        }

        for (const auto& alpha : alphas) {
            for (const auto& omega : omegas) {
                shifted = work;
                // forward differences in xi
                std::vector<int> xi_upper(static_cast<std::size_t>(xis.dim()), xis.radius());
                std::vector<int> probe(static_cast<std::size_t>(xis.dim()));
                for (int axis = 0; axis < xis.dim(); ++axis) {
                    for (int rep = 0; rep < alpha[static_cast<std::size_t>(axis)]; ++rep) {
                        xi_upper[static_cast<std::size_t>(axis)] -= 1;
                        for (Index a = 0; a < Wx; ++a) {
                            const auto xi = xis.frequency(a);
                            if (xi[axis] + 1 > xis.radius()) continue;
                            for (int c = 0; c < xis.dim(); ++c) probe[static_cast<std::size_t>(c)] = xi[c];
                            probe[static_cast<std::size_t>(axis)] += 1;
                            const Index a_next = xis.index_of(probe);
                            for (Index j = 0; j < P; ++j) {
                                for (Index e = 0; e < We; ++e) {
                                    at(shifted, j, a, e) =
                                        at(shifted, j, a_next, e) - at(shifted, j, a, e);
                                }
                            }
                        }
                    }
                }
                // forward differences in eta
                std::vector<int> eta_upper(static_cast<std::size_t>(etas.dim()), etas.radius());
                std::vector<int> eprobe(static_cast<std::size_t>(etas.dim()));
                for (int axis = 0; axis < etas.dim(); ++axis) {
                    for (int rep = 0; rep < omega[static_cast<std::size_t>(axis)]; ++rep) {
                        eta_upper[static_cast<std::size_t>(axis)] -= 1;
                        for (Index e = 0; e < We; ++e) {
                            const auto eta = etas.frequency(e);
                            if (eta[axis] + 1 > etas.radius()) continue;
                            for (int c = 0; c < etas.dim(); ++c) eprobe[static_cast<std::size_t>(c)] = eta[c];
                            eprobe[static_cast<std::size_t>(axis)] += 1;
                            const Index e_next = etas.index_of(eprobe);
                            for (Index j = 0; j < P; ++j) {
                                for (Index a = 0; a < Wx; ++a) {
                                    at(shifted, j, a, e) =
                                        at(shifted, j, a, e_next) - at(shifted, j, a, e);
                                }
                            }
                        }
                    }
                }

                const double exponent = b.order() -
                                        b.rho() * (total_order(alpha) + total_order(omega)) +
                                        b.delta() * total_order(gamma);
                double sup = 0.0;
                for (Index a = 0; a < Wx; ++a) {
                    const auto xi = xis.frequency(a);
                    bool valid = true;
                    for (int c = 0; c < xis.dim(); ++c) {
                        if (xi[c] > xi_upper[static_cast<std::size_t>(c)]) valid = false;
                    }
                    if (!valid) continue;
                    for (Index e = 0; e < We; ++e) {
                        const auto eta = etas.frequency(e);
                        bool evalid = true;
                        for (int c = 0; c < etas.dim(); ++c) {
                            if (eta[c] > eta_upper[static_cast<std::size_t>(c)]) evalid = false;
                        }
                        if (!evalid) continue;
                        const double denom = std::pow(japanese_bracket(xi, eta), exponent);
                        for (Index j = 0; j < P; ++j) {
                            sup = std::max(sup, std::abs(at(shifted, j, a, e)) / denom);
                        }
                    }
                }
                report.entries.push_back(BoundEntry{gamma, alpha, omega, sup});
            }
        }
    }

    double inf_ratio = std::numeric_limits<double>::infinity();
    bool any = false;
    for (Index a = 0; a < Wx; ++a) {
        const double xi_norm = xis.euclidean_norm(a);
        for (Index e = 0; e < We; ++e) {
            if (xi_norm + etas.euclidean_norm(e) < m0) continue;
            const double denom = std::pow(japanese_bracket(xis.frequency(a), etas.frequency(e)),
                                          b.order());
            for (Index j = 0; j < P; ++j) {
                inf_ratio = std::min(inf_ratio, std::abs(b.value(j, a, e)) / denom);
                any = true;
            }
        }
    }
    report.ellipticity_constant = any ? inf_ratio : 0.0;
    return report;
}

}  // namespace torpsido
