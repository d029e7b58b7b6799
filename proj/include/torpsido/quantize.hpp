#pragma once

#include "torpsido/symbol.hpp"

#include <functional>

namespace torpsido {

/// Dense matrix of an operator on the ordered basis {exp_xi (x) e_alpha},
/// frequency-major, fiber-minor: basis index = freq_index * d + alpha.
/// Rows use d_out, columns d_in. This is the universal brute-force oracle.
struct AssembledOperator {
    FrequencyWindow window;
    int dim_out;
    int dim_in;
    Matrix matrix;  // (W*d_out) x (W*d_in)
};

/// Entry block (xi, eta) = sigma_hat_x(xi - eta, eta). Multipliers produce an
/// exactly block-diagonal matrix (structural zeros). X-dependent tables need
/// a grid with M >= 4N+1 so the difference-frequency transform is exact.
AssembledOperator assemble_matrix(const SymbolTable& sigma);

/// (T_sigma f)(x_j) = sum_xi exp(2 pi i x_j.xi) sigma(x_j, xi) fhat(xi).
/// Multipliers act on f's own grid; x-dependent symbols require their grid
/// (M >= 4N+1) and return the result sampled there.
VectorField apply_periodic(const SymbolTable& sigma, const VectorField& f);

/// Stack window coefficients frequency-major into one vector and back.
Vector stack_coefficients(const FourierCoefficients& coeffs);
FourierCoefficients unstack_coefficients(const FrequencyWindow& window, int fiber_dim,
                                         const Vector& stacked);

/// Dense oracle application through Fourier data.
FourierCoefficients apply_assembled(const AssembledOperator& op, const FourierCoefficients& coeffs);

using OperatorFn = std::function<VectorField(const VectorField&)>;

/// Symbol extraction sigma(x_j, eta) e_beta = exp(-2 pi i x_j.eta) (A(e_eta (x) e_beta))(x_j).
/// Runs a linearity spot check on the black box first and throws ContractError
/// if it fails.
SymbolTable symbol_from_operator(const OperatorFn& apply, const FrequencyWindow& window,
                                 const TorusGrid& grid, int dim_in, double linearity_tol = 1e-10);

/// Symbol of a discrete operator on Z^n, stored by its Fourier coefficients
/// in the dual variable: a(x, xi) = sum_kappa coeff_kappa(x) exp(2 pi i kappa.xi),
/// one coefficient table per lattice site x. This makes the T^n integral in
/// the discrete quantization an exact finite quadrature.
class DiscreteSymbol {
public:
    DiscreteSymbol(FrequencyWindow lattice, FrequencyWindow dual, int dim_out, int dim_in,
                   std::vector<Matrix> coeffs);

    const FrequencyWindow& lattice() const { return lattice_; }
    const FrequencyWindow& dual() const { return dual_; }
    int dim_out() const { return dim_out_; }
    int dim_in() const { return dim_in_; }

    const Matrix& coefficient(Index site, Index kappa) const {
        return coeffs_[static_cast<std::size_t>(site * dual_.size() + kappa)];
    }

    /// a(x, xi) at a continuous dual point xi in [0,1)^n.
    Matrix eval(Index site, std::span<const double> xi) const;

private:
    FrequencyWindow lattice_;
    FrequencyWindow dual_;
    int dim_out_;
    int dim_in_;
    std::vector<Matrix> coeffs_;
};

/// Discrete quantization by quadrature over a T^n grid:
///   t_a f(x) = (1/Mq^n) sum_q exp(2 pi i x.xi_q) a(x, xi_q) sum_y exp(-2 pi i y.xi_q) f(y).
/// quad_samples = 0 picks the smallest exact grid; a coarser explicit grid is
/// rejected.
LatticeField apply_discrete(const DiscreteSymbol& a, const LatticeField& f, int quad_samples = 0);

struct SpectrumReport {
    std::vector<Vector> per_frequency;  // eigenvalue multiset per window frequency
    Vector assembled;                   // eigenvalues of the assembled matrix
    double union_discrepancy;           // sorted-multiset mismatch, union vs assembled
};

/// Spectrum of a multiplier as the union of per-frequency spectra, checked
/// against the assembled matrix.
SpectrumReport multiplier_spectrum(const SymbolTable& sigma);

}  // namespace torpsido
