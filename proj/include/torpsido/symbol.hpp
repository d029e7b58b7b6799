#pragma once

#include "torpsido/lattice.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace torpsido {

/// Declared behavior of a symbol outside the truncation window. Index sums
/// are only well-defined under a declared tail.
enum class TailSpec { invertible_identity_like, zero, undeclared };

std::string to_string(TailSpec tail);
TailSpec tail_from_string(const std::string& name);

/// Dense table of operator values sigma(x_j, xi) in C^{d_out x d_in}.
/// The multiplier variant drops the grid and stores one matrix per window
/// frequency; the full variant stores one matrix per (grid point, frequency)
/// pair, indexed point-major.
class SymbolTable {
public:
    // multiplier variant
    SymbolTable(FrequencyWindow window, int dim_out, int dim_in, std::vector<Matrix> values,
                TailSpec tail);
    // x-dependent variant
    SymbolTable(TorusGrid grid, FrequencyWindow window, int dim_out, int dim_in,
                std::vector<Matrix> values, TailSpec tail);

    bool is_multiplier() const { return !grid_.has_value(); }
    const FrequencyWindow& window() const { return window_; }
    const TorusGrid& grid() const;
    int dim_out() const { return dim_out_; }
    int dim_in() const { return dim_in_; }
    TailSpec tail() const { return tail_; }

    /// Multiplier value at window position k.
    const Matrix& value(Index freq) const;
    /// Full-table value at (grid point, window position).
    const Matrix& value(Index point, Index freq) const;

    /// |alpha| labels of the fiber basis vectors, used in ellipticity rates.
    /// Defaults to 0,1,...,d_in-1; the Hoermander realization sets |eta|_2.
    const std::vector<double>& fiber_index_norms() const { return fiber_norms_; }
    void set_fiber_index_norms(std::vector<double> norms);

private:
    std::optional<TorusGrid> grid_;
    FrequencyWindow window_;
    int dim_out_;
    int dim_in_;
    TailSpec tail_;
    std::vector<Matrix> values_;
    std::vector<double> fiber_norms_;
};

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

struct SymbolFamilyParams {
    int dim_out = 1;
    int dim_in = 1;
    double order = 1.0;  // bessel exponent
    double decay = 1.0;  // envelope exponent r in <xi>^-r
    bool x_dependent = false;
    std::optional<std::uint64_t> seed;            // required by random families
    std::optional<std::vector<Vector>> diagonal;  // per-frequency entries, diagonal family
    std::optional<TailSpec> tail;                 // overrides the family default
};

/// Families: "identity", "bessel", "diagonal", "random-decay", "rectangular".
/// The "tensor-kernel" family is built through the nuclearity module.
/// Random families require a seed and reproduce bit-identical tables from it.
SymbolTable make_family(const std::string& name, const FrequencyWindow& window,
                        const SymbolFamilyParams& params,
                        const std::optional<TorusGrid>& grid = std::nullopt);

SymbolTable make_identity_symbol(const FrequencyWindow& window, int dim);
/// <xi>^order * Id with <xi> = (1+|xi|^2)^(1/2).
SymbolTable make_bessel_symbol(const FrequencyWindow& window, int dim, double order);
SymbolTable make_diagonal_symbol(const FrequencyWindow& window, std::vector<Vector> diagonal,
                                 TailSpec tail);

/// (1 + |t|^2)^(1/2) for the concatenated vector; bracket(xi) and bracket(xi,eta).
double japanese_bracket(std::span<const int> xi);
double japanese_bracket(std::span<const int> xi, std::span<const int> eta);

// ---------------------------------------------------------------------------
// Multiplier calculus
// ---------------------------------------------------------------------------

/// Per-frequency product a(eta) = sigma(eta) * tau(eta).
SymbolTable compose_multipliers(const SymbolTable& sigma, const SymbolTable& tau);

/// Per-frequency conjugate transpose; swaps d_in and d_out.
SymbolTable adjoint_multiplier(const SymbolTable& sigma);

/// R_lambda(eta) = (lambda - sigma(eta))^{-1}. Throws ContractError naming the
/// offending frequency when some block is singular relative to rel_tol.
SymbolTable resolvent_symbol(const SymbolTable& sigma, Complex lambda, double rel_tol = 1e-10);

/// exp(-t H) for Hermitian H via eigendecomposition.
Matrix hermitian_semigroup_exp(const Matrix& hermitian, double t);

/// Heat semigroup symbols (exp(-t sigma*sigma), exp(-t sigma sigma*)).
/// t = 0 yields exact identity tables; t < 0 is a domain error.
std::pair<SymbolTable, SymbolTable> heat_symbols(const SymbolTable& sigma, double t);

// ---------------------------------------------------------------------------
// Scalar bisymbols and the Hoermander-class realization
// ---------------------------------------------------------------------------

/// Scalar values b(y_j, xi, eta) on a T^m grid times Z^n x Z^m windows,
/// together with the class parameters (order, rho, delta).
class ScalarBisymbol {
public:
    using Evaluator = std::function<Complex(std::span<const double> y, std::span<const int> xi,
                                            std::span<const int> eta)>;

    ScalarBisymbol(TorusGrid y_grid, FrequencyWindow xi_window, FrequencyWindow eta_window,
                   double order, double rho, double delta, std::vector<Complex> values);

    static ScalarBisymbol from_function(const TorusGrid& y_grid, const FrequencyWindow& xi_window,
                                        const FrequencyWindow& eta_window, double order, double rho,
                                        double delta, const Evaluator& fn);

    const TorusGrid& y_grid() const { return y_grid_; }
    const FrequencyWindow& xi_window() const { return xi_window_; }
    const FrequencyWindow& eta_window() const { return eta_window_; }
    double order() const { return order_; }
    double rho() const { return rho_; }
    double delta() const { return delta_; }

    Complex value(Index point, Index xi, Index eta) const {
        return values_[static_cast<std::size_t>((point * xi_window_.size() + xi) * eta_window_.size() +
                                                eta)];
    }

private:
    TorusGrid y_grid_;
    FrequencyWindow xi_window_;
    FrequencyWindow eta_window_;
    double order_;
    double rho_;
    double delta_;
    std::vector<Complex> values_;
};

/// Families: "bracket" (<xi,eta>^order), "bracket-cos" ((2+cos 2pi y1)<xi,eta>^order),
/// "bracket-mixed" ((2+cos(2pi y1)/2+sin(4pi y1)/2)<xi,eta>^order), "constant".
ScalarBisymbol make_bisymbol_family(const std::string& name, const TorusGrid& y_grid,
                                    const FrequencyWindow& xi_window,
                                    const FrequencyWindow& eta_window, double order,
                                    double rho = 1.0, double delta = 0.0);

/// Compression of Op(b(.,xi,.)) to the truncated Fourier basis {e_eta} of
/// L^2(T^m): matrix entries a(xi)[eta',eta] = bhat_y(eta'-eta, xi, eta).
/// For y-independent b the result is diagonal with entries b(xi,eta).
SymbolTable hoermander_realize(const ScalarBisymbol& b, TailSpec tail = TailSpec::undeclared);

struct BoundEntry {
    std::vector<int> dy;    // gamma
    std::vector<int> dxi;   // alpha
    std::vector<int> deta;  // omega
    double constant;        // sup |d^gamma D^alpha D^omega b| / <xi,eta>^(kappa-rho(|a|+|w|)+delta|g|)
};

struct HoermanderBoundsReport {
    std::vector<BoundEntry> entries;
    double ellipticity_constant = 0.0;  // inf |b| / <xi,eta>^kappa over |xi|+|eta| >= m0
    double m0 = 0.0;
    double order = 0.0;
    double rho = 1.0;
    double delta = 0.0;

    double constant_for(std::span<const int> dy, std::span<const int> dxi,
                        std::span<const int> deta) const;
};

/// Empirical class constants on the truncated domain: forward differences in
/// xi and eta (boundary frequencies excluded from sups), spectral derivatives
/// in y. Caps are per total order, each <= 3.
HoermanderBoundsReport hoermander_bounds_report(const ScalarBisymbol& b, int alpha_max,
                                                int gamma_max, double m0 = 0.0);

}  // namespace torpsido
