#pragma once

#include "torpsido/nuclearity.hpp"

#include "torpsido/errors.hpp"

namespace torpsido {

struct MatrixIndexResult {
    Index kernel_dim = 0;
    Index cokernel_dim = 0;
    long index = 0;        // kernel_dim - cokernel_dim
    bool ambiguous = false;  // threshold fell inside a near-degenerate singular gap
    double gap = 0.0;
    double threshold = 0.0;  // tol * sigma_max
};

/// Numerical-rank index from the SVD: singular values below tol * sigma_max
/// count as kernel directions (structural zeros of rectangular shapes
/// included). Flags the decision as ambiguous when the threshold sits inside
/// a singular-value gap smaller than 10 machine epsilons of sigma_max.
MatrixIndexResult matrix_index(const Matrix& m, double tol = 1e-9);

struct McKeanSingerResult {
    std::vector<double> t_grid;
    std::vector<double> values;  // tr exp(-t T*T) - tr exp(-t T T*)
    double spread = 0.0;         // max - min over the grid
    long svd_index = 0;
    bool consistent = false;  // every value within 1e-8 of the SVD index
};

/// Heat-trace index over a positive t grid of >= 3 points spanning >= 2
/// decades; computed via Hermitian eigendecompositions of T*T and TT*.
McKeanSingerResult mckean_singer(const Matrix& m, std::span<const double> t_grid,
                                 double rank_tol = 1e-9);

std::vector<double> default_heat_grid();         // {0.01, 0.1, 1, 10}
std::vector<double> default_ellipticity_grid();  // 16 log-spaced points in [1e-3, 1e2]

struct PerFrequencyIndex {
    Index freq = 0;
    Index kernel_dim = 0;
    Index cokernel_dim = 0;
    long index = 0;
    bool ambiguous = false;
};

struct IndexReport {
    std::vector<PerFrequencyIndex> per_frequency;
    long total = 0;
    long assembled_index = 0;
    std::vector<double> ms_t_grid;
    std::vector<double> ms_values;
    double ms_spread = 0.0;
    double rank_tol = 1e-9;
    std::string tail_note;  // truncation semantics of the reported sum
};

/// Per-frequency Fredholm indices summed over the window, cross-checked
/// against the assembled matrix and its McKean-Singer values. Refuses
/// undeclared tails: the sum is not well-defined under truncation.
IndexReport multiplier_index(const SymbolTable& sigma, double rank_tol = 1e-9,
                             std::span<const double> t_grid = {});

struct HeatTraceReport {
    double t = 0.0;
    Complex assembled_source{0.0, 0.0};  // tr exp(-t A*A), assembled path
    Complex summed_source{0.0, 0.0};     // sum_xi tr exp(-t sigma(xi)* sigma(xi))
    Complex assembled_target{0.0, 0.0};  // tr exp(-t A A*)
    Complex summed_target{0.0, 0.0};
    std::vector<Complex> per_frequency_source;
    std::vector<Complex> per_frequency_target;
    double discrepancy_source = 0.0;
    double discrepancy_target = 0.0;
};

/// Heat-trace sums for both Laplacians of a multiplier at time t > 0.
HeatTraceReport heat_trace_sum(const SymbolTable& sigma, double t);

struct EllipticityRate {
    Index freq = 0;
    int alpha = 0;
    double fiber_norm = 0.0;   // |alpha| label of the basis vector
    double rate_source = 0.0;  // inf over the grid of -log|exp(-t s*s) e_a| / t
    double rate_target = 0.0;
};

struct EllipticityReport {
    std::vector<EllipticityRate> rates;
    double admissible_constant = 0.0;          // min rate / (1+|alpha|+|xi|)^m
    double admissible_constant_bracket = 0.0;  // min rate / <xi, alpha>^m
    bool positive = false;
    double margin = 1e-8;
    double exponent_m = 1.0;
    std::vector<double> t_grid;
};

/// Heat-decay rates per (frequency, basis vector) on a log-spaced t grid;
/// the defining sup over continuous t is reported as the grid extremum.
/// Both exponent scalings (1+|alpha|+|xi|)^m and <xi,alpha>^m are reported.
EllipticityReport mb_ellipticity_report(const SymbolTable& sigma, double m,
                                        std::span<const double> t_grid = {});

struct FrequencyRankRow {
    Index freq = 0;
    Index kernel_dim = 0;
    Index cokernel_dim = 0;
};

/// Kernel/cokernel dimensions per window frequency (one row each).
std::vector<FrequencyRankRow> fredholm_necessity_report(const SymbolTable& sigma,
                                                        double tol = 1e-9);

/// Thrown when the index experiment's ellipticity gate fails; carries the
/// bounds report that triggered the refusal.
class EllipticityGateError : public ContractError {
public:
    EllipticityGateError(const std::string& what, HoermanderBoundsReport report)
        : ContractError(what), bounds_(std::move(report)) {}
    const HoermanderBoundsReport& bounds() const { return bounds_; }

private:
    HoermanderBoundsReport bounds_;
};

struct HoermanderIndexExperiment {
    HoermanderBoundsReport bounds;
    IndexReport index;
    bool paths_agree = false;  // window sum == assembled index == heat value
};

/// Realizes the bisymbol as an operator-valued multiplier (after an
/// ellipticity gate on the window) and compares the three index paths.
HoermanderIndexExperiment periodic_index_experiment(const ScalarBisymbol& b,
                                                    double rank_tol = 1e-9,
                                                    std::span<const double> t_grid = {});

}  // namespace torpsido
