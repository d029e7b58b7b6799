#include "torpsido/quantize.hpp"

#include "torpsido/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace torpsido {

namespace {

void require_quantization_grid(const SymbolTable& sigma, const char* what) {
    if (sigma.is_multiplier()) return;
    const int need = 4 * sigma.window().radius() + 1;
    if (sigma.grid().samples_per_axis() < need) {
        std::ostringstream msg;
        msg << what << ": grid too coarse for exact symbol transforms (need M >= " << need << ")";
        throw ValidationError(msg.str());
    }
}

}  // namespace

AssembledOperator assemble_matrix(const SymbolTable& sigma) {
    const FrequencyWindow& window = sigma.window();
    const Index W = window.size();
    const int d_out = sigma.dim_out();
    const int d_in = sigma.dim_in();
    Matrix matrix = Matrix::Zero(W * d_out, W * d_in);

    if (sigma.is_multiplier()) {
        for (Index k = 0; k < W; ++k) {
            matrix.block(k * d_out, k * d_in, d_out, d_in) = sigma.value(k);
        }
        return AssembledOperator{window, d_out, d_in, std::move(matrix)};
    }

    require_quantization_grid(sigma, "assemble_matrix");
    const TorusGrid& grid = sigma.grid();
    const auto roots = unit_roots(grid.samples_per_axis());
    std::vector<int> diff(static_cast<std::size_t>(window.dim()));
    for (Index col = 0; col < W; ++col) {
        const auto eta = window.frequency(col);
        for (Index row = 0; row < W; ++row) {
            const auto xi = window.frequency(row);
            for (int a = 0; a < window.dim(); ++a) diff[static_cast<std::size_t>(a)] = xi[a] - eta[a];
            Matrix block = Matrix::Zero(d_out, d_in);
            for (Index j = 0; j < grid.size(); ++j) {
                block += std::conj(roots[static_cast<std::size_t>(grid.dot_mod(j, diff))]) *
                         sigma.value(j, col);
            }
            matrix.block(row * d_out, col * d_in, d_out, d_in) =
                block * grid.quadrature_weight();
        }
    }
    return AssembledOperator{window, d_out, d_in, std::move(matrix)};
}

VectorField apply_periodic(const SymbolTable& sigma, const VectorField& f) {
    if (f.fiber_dim() != sigma.dim_in()) {
        throw ValidationError("apply_periodic: fiber dimension mismatch");
    }
    const FrequencyWindow& window = sigma.window();
    const FourierCoefficients coeffs = forward_vft(f, window);

    if (sigma.is_multiplier()) {
        Matrix out(sigma.dim_out(), window.size());
        for (Index k = 0; k < window.size(); ++k) {
            out.col(k) = sigma.value(k) * coeffs.values().col(k);
        }
        return inverse_vft(FourierCoefficients(window, std::move(out)), f.grid());
    }

    require_quantization_grid(sigma, "apply_periodic");
    const TorusGrid& grid = sigma.grid();
    const auto roots = unit_roots(grid.samples_per_axis());
    Matrix out = Matrix::Zero(sigma.dim_out(), grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        Vector acc = Vector::Zero(sigma.dim_out());
        for (Index k = 0; k < window.size(); ++k) {
            const int r = grid.dot_mod(j, window.frequency(k));
            acc += roots[static_cast<std::size_t>(r)] * (sigma.value(j, k) * coeffs.values().col(k));
        }
        out.col(j) = acc;
    }
    return VectorField(grid, std::move(out));
}

Vector stack_coefficients(const FourierCoefficients& coeffs) {
    const Index d = coeffs.fiber_dim();
    Vector out(coeffs.window().size() * d);
    for (Index k = 0; k < coeffs.window().size(); ++k) {
        out.segment(k * d, d) = coeffs.values().col(k);
    }
    return out;
}

FourierCoefficients unstack_coefficients(const FrequencyWindow& window, int fiber_dim,
                                         const Vector& stacked) {
    if (stacked.size() != window.size() * fiber_dim) {
        throw ValidationError("unstack_coefficients: length mismatch");
    }
    Matrix values(fiber_dim, window.size());
    for (Index k = 0; k < window.size(); ++k) {
        values.col(k) = stacked.segment(k * fiber_dim, fiber_dim);
    }
    return FourierCoefficients(window, std::move(values));
}

FourierCoefficients apply_assembled(const AssembledOperator& op, const FourierCoefficients& coeffs) {
    if (!(coeffs.window() == op.window) || coeffs.fiber_dim() != op.dim_in) {
        throw ValidationError("apply_assembled: operand does not match the operator basis");
    }
    const Vector out = op.matrix * stack_coefficients(coeffs);
    return unstack_coefficients(op.window, op.dim_out, out);
}

namespace {

// Deterministic band-limited probe for the linearity spot check.
VectorField probe_field(const TorusGrid& grid, const FrequencyWindow& window, int dim, int variant) {
    Matrix coeffs(dim, window.size());
    for (Index k = 0; k < window.size(); ++k) {
        for (int i = 0; i < dim; ++i) {
            const double phase = 0.7 * static_cast<double>(k + 1) + 1.3 * i + 2.1 * variant;
            coeffs(i, k) = Complex(std::cos(phase), std::sin(1.7 * phase));
        }
    }
    return inverse_vft(FourierCoefficients(window, std::move(coeffs)), grid);
}

}  // namespace

SymbolTable symbol_from_operator(const OperatorFn& apply, const FrequencyWindow& window,
                                 const TorusGrid& grid, int dim_in, double linearity_tol) {
    if (grid.dim() != window.dim()) {
        throw ValidationError("symbol_from_operator: grid and window dimensions differ");
    }
    if (grid.samples_per_axis() < 2 * window.radius() + 1) {
        throw ValidationError("symbol_from_operator: grid too coarse for the window");
    }

    const VectorField probe_a = probe_field(grid, window, dim_in, 0);
    const VectorField probe_b = probe_field(grid, window, dim_in, 1);
    VectorField sum_probe(grid, Matrix(probe_a.samples() + probe_b.samples()));
    const VectorField image_a = apply(probe_a);
    const VectorField image_b = apply(probe_b);
    const VectorField image_sum = apply(sum_probe);
    if (image_a.grid() != grid || image_a.fiber_dim() != image_b.fiber_dim()) {
        throw ValidationError("symbol_from_operator: black box changed grid or fiber dimension");
    }
    const double scale = image_a.samples().norm() + image_b.samples().norm();
    const double defect =
        (image_sum.samples() - image_a.samples() - image_b.samples()).norm();
    if (defect > linearity_tol * std::max(1.0, scale)) {
        std::ostringstream msg;
        msg << "symbol_from_operator: nonlinearity detected (defect " << defect << ")";
        throw ContractError(msg.str());
    }

    const int dim_out = image_a.fiber_dim();
    const auto roots = unit_roots(grid.samples_per_axis());
    std::vector<Matrix> values(static_cast<std::size_t>(grid.size() * window.size()),
                               Matrix::Zero(dim_out, dim_in));
    for (Index k = 0; k < window.size(); ++k) {
        const auto eta = window.frequency(k);
        for (int beta = 0; beta < dim_in; ++beta) {
            Vector unit = Vector::Zero(dim_in);
            unit(beta) = 1.0;
            const VectorField image = apply(character_field(grid, eta, unit));
            if (image.grid() != grid || image.fiber_dim() != dim_out) {
                throw ValidationError("symbol_from_operator: black box changed grid or fiber dimension");
            }
            for (Index j = 0; j < grid.size(); ++j) {
                const Complex phase = std::conj(roots[static_cast<std::size_t>(grid.dot_mod(j, eta))]);
                values[static_cast<std::size_t>(j * window.size() + k)].col(beta) =
                    phase * image.samples().col(j);
            }
        }
    }
    return SymbolTable(grid, window, dim_out, dim_in, std::move(values), TailSpec::undeclared);
}

DiscreteSymbol::DiscreteSymbol(FrequencyWindow lattice, FrequencyWindow dual, int dim_out,
                               int dim_in, std::vector<Matrix> coeffs)
    : lattice_(std::move(lattice)),
      dual_(std::move(dual)),
      dim_out_(dim_out),
      dim_in_(dim_in),
      coeffs_(std::move(coeffs)) {
    if (lattice_.dim() != dual_.dim()) {
        throw ValidationError("DiscreteSymbol: lattice and dual dimensions differ");
    }
    if (coeffs_.size() != static_cast<std::size_t>(lattice_.size() * dual_.size())) {
        throw ValidationError("DiscreteSymbol: coefficient count mismatch");
    }
    for (const auto& m : coeffs_) {
        if (m.rows() != dim_out_ || m.cols() != dim_in_) {
            throw ValidationError("DiscreteSymbol: coefficient shape mismatch");
        }
    }
}

Matrix DiscreteSymbol::eval(Index site, std::span<const double> xi) const {
    Matrix acc = Matrix::Zero(dim_out_, dim_in_);
    const double two_pi = 2.0 * std::numbers::pi;
    for (Index k = 0; k < dual_.size(); ++k) {
        const auto kappa = dual_.frequency(k);
        double angle = 0.0;
        for (int a = 0; a < dual_.dim(); ++a) angle += kappa[a] * xi[a];
        acc += Complex(std::cos(two_pi * angle), std::sin(two_pi * angle)) * coefficient(site, k);
    }
    return acc;
}

LatticeField apply_discrete(const DiscreteSymbol& a, const LatticeField& f, int quad_samples) {
    if (f.fiber_dim() != a.dim_in()) {
        throw ValidationError("apply_discrete: fiber dimension mismatch");
    }
    if (f.support().dim() != a.lattice().dim()) {
        throw ValidationError("apply_discrete: lattice dimension mismatch");
    }
    const int needed =
        a.lattice().radius() + f.support().radius() + a.dual().radius() + 1;
    if (quad_samples == 0) quad_samples = needed;
    if (quad_samples < needed) {
        std::ostringstream msg;
        msg << "apply_discrete: quadrature grid too coarse (need M >= " << needed << ")";
        throw ValidationError(msg.str());
    }

    const TorusGrid quad(a.lattice().dim(), quad_samples);
    const auto roots = unit_roots(quad_samples);

    // discrete Fourier transform of f at the quadrature nodes
    Matrix fhat = Matrix::Zero(f.fiber_dim(), quad.size());
    for (Index q = 0; q < quad.size(); ++q) {
        Vector acc = Vector::Zero(f.fiber_dim());
        for (Index y = 0; y < f.support().size(); ++y) {
            acc += std::conj(roots[static_cast<std::size_t>(quad.dot_mod(q, f.support().frequency(y)))]) *
                   f.values().col(y);
        }
        fhat.col(q) = acc;
    }

    Matrix out = Matrix::Zero(a.dim_out(), a.lattice().size());
    for (Index x = 0; x < a.lattice().size(); ++x) {
        const auto site = a.lattice().frequency(x);
        Vector acc = Vector::Zero(a.dim_out());
        for (Index q = 0; q < quad.size(); ++q) {
            // a(x, xi_q) from its dual coefficients, all phases quad-grid roots
            Matrix sym = Matrix::Zero(a.dim_out(), a.dim_in());
            for (Index k = 0; k < a.dual().size(); ++k) {
                sym += roots[static_cast<std::size_t>(quad.dot_mod(q, a.dual().frequency(k)))] *
                       a.coefficient(x, k);
            }
            acc += roots[static_cast<std::size_t>(quad.dot_mod(q, site))] * (sym * fhat.col(q));
        }
        out.col(x) = acc * quad.quadrature_weight();
    }
    return LatticeField(a.lattice(), std::move(out));
}

namespace {

void sort_complex(Vector& v) {
    std::vector<Complex> tmp(v.data(), v.data() + v.size());
    std::sort(tmp.begin(), tmp.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    for (Index i = 0; i < v.size(); ++i) v(i) = tmp[static_cast<std::size_t>(i)];
}

}  // namespace

SpectrumReport multiplier_spectrum(const SymbolTable& sigma) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("multiplier_spectrum: multiplier variant required");
    }
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("multiplier_spectrum: square fibers required");
    }
    SpectrumReport report;
    report.per_frequency.reserve(static_cast<std::size_t>(sigma.window().size()));
    std::vector<Complex> pooled;
    for (Index k = 0; k < sigma.window().size(); ++k) {
        Eigen::ComplexEigenSolver<Matrix> es(sigma.value(k), false);
        report.per_frequency.push_back(es.eigenvalues());
        for (Index i = 0; i < es.eigenvalues().size(); ++i) {
            pooled.push_back(es.eigenvalues()(i));
        }
    }
    const AssembledOperator op = assemble_matrix(sigma);
    Eigen::ComplexEigenSolver<Matrix> es(op.matrix, false);
    report.assembled = es.eigenvalues();
    sort_complex(report.assembled);

    Vector unioned(static_cast<Index>(pooled.size()));
    for (Index i = 0; i < unioned.size(); ++i) unioned(i) = pooled[static_cast<std::size_t>(i)];
    sort_complex(unioned);

    double disc = 0.0;
    for (Index i = 0; i < unioned.size(); ++i) {
        disc = std::max(disc, std::abs(unioned(i) - report.assembled(i)));
    }
    report.union_discrepancy = disc;
    return report;
}

}  // namespace torpsido
