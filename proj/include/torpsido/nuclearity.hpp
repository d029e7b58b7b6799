#pragma once

#include "torpsido/quantize.hpp"

#include <cstdint>

namespace torpsido {

/// Paired factor sequences {h_k} (target side, L^{p'}) and {g_k} (source
/// side, L^p) realizing the tensor-kernel operator
///   f  ->  sum_k <f, g_k>_bilinear h_k,
/// with the unconjugated pairing <u,v> = integral of sum_i u_i v_i.
class NuclearDecomposition {
public:
    NuclearDecomposition(TorusGrid grid, int dim_out, int dim_in, double p, double s,
                         std::vector<VectorField> out_factors, std::vector<VectorField> in_factors);

    const TorusGrid& grid() const { return grid_; }
    int dim_out() const { return dim_out_; }
    int dim_in() const { return dim_in_; }
    double p() const { return p_; }
    double p_conj() const { return p_ / (p_ - 1.0); }
    double s() const { return s_; }
    Index terms() const { return static_cast<Index>(out_factors_.size()); }
    const std::vector<VectorField>& out_factors() const { return out_factors_; }
    const std::vector<VectorField>& in_factors() const { return in_factors_; }
    /// sum_k |h_k|_{p'}^s |g_k|_p^s, fixed at construction.
    double summability() const { return summability_; }

private:
    TorusGrid grid_;
    int dim_out_;
    int dim_in_;
    double p_;
    double s_;
    std::vector<VectorField> out_factors_;
    std::vector<VectorField> in_factors_;
    double summability_;
};

/// Discrete mirror on a finite symmetric box of Z^n (counting measure).
class DiscreteDecomposition {
public:
    DiscreteDecomposition(FrequencyWindow support, int dim_out, int dim_in, double p, double s,
                          std::vector<LatticeField> out_factors,
                          std::vector<LatticeField> in_factors);

    const FrequencyWindow& support() const { return support_; }
    int dim_out() const { return dim_out_; }
    int dim_in() const { return dim_in_; }
    double p() const { return p_; }
    double p_conj() const { return p_ / (p_ - 1.0); }
    double s() const { return s_; }
    Index terms() const { return static_cast<Index>(out_factors_.size()); }
    const std::vector<LatticeField>& out_factors() const { return out_factors_; }
    const std::vector<LatticeField>& in_factors() const { return in_factors_; }
    double summability() const { return summability_; }

private:
    FrequencyWindow support_;
    int dim_out_;
    int dim_in_;
    double p_;
    double s_;
    std::vector<LatticeField> out_factors_;
    std::vector<LatticeField> in_factors_;
    double summability_;
};

/// Unconjugated duality pairings.
Complex bilinear_pairing(const VectorField& u, const VectorField& v);
Complex bilinear_pairing(const LatticeField& u, const LatticeField& v);

/// Tensor-kernel application (sum_k h_k (x) g_k) f = sum_k <f, g_k> h_k.
VectorField kernel_operator(const NuclearDecomposition& dec, const VectorField& f);
LatticeField kernel_operator(const DiscreteDecomposition& dec, const LatticeField& f);

/// sigma(x_j, xi) = exp(-2 pi i x_j.xi) sum_k h_k(x_j) ghat_k(-xi)^T on the
/// given window; quantizing it reproduces the kernel operator exactly at
/// truncation for window-band-limited factors.
SymbolTable decomposition_to_symbol(const NuclearDecomposition& dec,
                                    const FrequencyWindow& window);

/// a(x, xi) = exp(-2 pi i x.xi) sum_k (h_k (x) F_{Z^n} g_k)(x, -xi), stored by
/// dual Fourier coefficients: coeff_kappa(x) = sum_k h_k(x) g_k(x+kappa)^T.
DiscreteSymbol discrete_decomposition_to_symbol(const DiscreteDecomposition& dec);

struct TraceReport {
    Complex nuclear{0.0, 0.0};
    Complex spectral{0.0, 0.0};
    std::vector<Complex> per_frequency;
    double discrepancy = 0.0;  // |nuclear - spectral|
};

std::string to_text(const TraceReport& report);
std::string to_json_text(const TraceReport& report);

struct ShellRow {
    int shell;
    double value;
    double cumulative;
};

struct SummabilityReport {
    std::vector<ShellRow> shells;
    std::vector<double> ratios;  // S_{r+1} / S_r
    bool summable_trend = false;
    double s = 1.0;
    double p2 = 2.0;
};

struct DecayReport {
    double norm = 0.0;
    std::vector<ShellRow> shells;  // shell sums of |.|_op^{p'}
    std::vector<double> ratios;
    bool summable_trend = false;
    double p_conj = 2.0;
};

struct PositiveTraceReport {
    TraceReport base;
    Complex conjugated{0.0, 0.0};  // formula value after a random unitary fiber change
    double witness_discrepancy = 0.0;
};

/// Per-shell partial sums of sum_xi sum_alpha |x -> |sigma(x,xi)e_alpha||_{L^{p2}}^s
/// with a ratio diagnostic; the verdict is a trend, not a convergence proof.
SummabilityReport summability_check(const SymbolTable& sigma, double s, double p2);

/// Nuclear trace sum_xi integral tr sigma(x,xi) dx against the eigenvalue sum
/// of the assembled matrix.
TraceReport nuclear_trace_pdo(const SymbolTable& sigma);

/// Multiplier trace sum_xi tr sigma(xi) with per-frequency breakdown.
TraceReport nuclear_trace_multiplier(const SymbolTable& sigma);

/// Basis-free positive trace formula; requires Hermitian PSD values
/// (min eigenvalue >= -1e-10, violations named by (x_j, xi)) and witnesses
/// basis independence through a seeded random unitary conjugation.
PositiveTraceReport positive_trace_formula(const SymbolTable& sigma, std::uint64_t seed = 1);

/// (sum_xi integral |sigma(x,xi)|_op^{p'} dx)^{1/p'} with per-shell breakdown.
DecayReport decay_norm(const SymbolTable& sigma, double p_conj);

/// Discrete mirror (integral over T^n of sum_x |a(x,xi)|_op^{p'})^{1/p'} by
/// quadrature; shells run over |x|_inf. quad_samples = 0 picks a default.
DecayReport decay_norm(const DiscreteSymbol& a, double p_conj, int quad_samples = 0);

/// ((1/Mq^n) sum_q |F_{Z^n} g(-xi_q)|^{p'})^{1/p'} on the same quadrature used
/// by the discrete decay norm; the exact comparison factor for its bound.
double discrete_transform_lp_norm(const LatticeField& g, double p_conj, int quad_samples);

/// (sum_i s_i^s)^{1/s} over the singular values.
double schatten_norm(const Matrix& m, double s);

/// Matrix trace against the eigenvalue sum.
TraceReport grothendieck_check(const Matrix& m);

/// Seeded random band-limited decomposition factors (for experiments/tests).
NuclearDecomposition random_periodic_decomposition(const TorusGrid& grid,
                                                   const FrequencyWindow& window, int dim,
                                                   Index terms, double p, double s,
                                                   std::uint64_t seed);
DiscreteDecomposition random_discrete_decomposition(const FrequencyWindow& support, int dim,
                                                    Index terms, double p, double s,
                                                    std::uint64_t seed);

}  // namespace torpsido
