#include "torpsido/nuclearity.hpp"

#include "torpsido/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace torpsido {

namespace {

void check_exponents(double p, double s, const char* what) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw ValidationError(std::string(what) + ": p must lie in (1, inf)");
    }
    if (!(s > 0.0) || s > 1.0) {
        throw ValidationError(std::string(what) + ": s must lie in (0, 1]");
    }
}

double operator_norm(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Trend verdict: the last (up to three) shell ratios all below one.
// A vanished shell followed by another vanished shell counts as ratio 0.
void fill_trend(const std::vector<ShellRow>& shells, std::vector<double>& ratios, bool& verdict) {
    ratios.clear();
    for (std::size_t r = 0; r + 1 < shells.size(); ++r) {
        const double cur = shells[r].value;
        const double next = shells[r + 1].value;
        if (cur == 0.0) {
            ratios.push_back(next == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        } else {
            ratios.push_back(next / cur);
        }
    }
    const std::size_t look = std::min<std::size_t>(3, ratios.size());
    if (look == 0) {
        verdict = false;  // single shell: no trend to certify
        return;
    }
    verdict = true;
    for (std::size_t i = ratios.size() - look; i < ratios.size(); ++i) {
        if (!(ratios[i] < 1.0)) verdict = false;
    }
}

Complex eigenvalue_sum(const Matrix& m) {
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    return es.eigenvalues().sum();
}

}  // namespace

NuclearDecomposition::NuclearDecomposition(TorusGrid grid, int dim_out, int dim_in, double p,
                                           double s, std::vector<VectorField> out_factors,
                                           std::vector<VectorField> in_factors)
    : grid_(grid),
      dim_out_(dim_out),
      dim_in_(dim_in),
      p_(p),
      s_(s),
      out_factors_(std::move(out_factors)),
      in_factors_(std::move(in_factors)) {
    check_exponents(p_, s_, "NuclearDecomposition");
    if (out_factors_.size() != in_factors_.size()) {
        throw ValidationError("NuclearDecomposition: factor sequences must pair up");
    }
    summability_ = 0.0;
    for (std::size_t k = 0; k < out_factors_.size(); ++k) {
        const auto& h = out_factors_[k];
        const auto& g = in_factors_[k];
        if (h.grid() != grid_ || g.grid() != grid_) {
            throw ValidationError("NuclearDecomposition: factors must share the grid");
        }
        if (h.fiber_dim() != dim_out_ || g.fiber_dim() != dim_in_) {
            throw ValidationError("NuclearDecomposition: factor fiber dimensions mismatch");
        }
        summability_ += std::pow(lp_norm(h, p_conj()), s_) * std::pow(lp_norm(g, p_), s_);
    }
    if (!std::isfinite(summability_)) {
        throw ValidationError("NuclearDecomposition: summability sum is not finite");
    }
}

DiscreteDecomposition::DiscreteDecomposition(FrequencyWindow support, int dim_out, int dim_in,
                                             double p, double s,
                                             std::vector<LatticeField> out_factors,
                                             std::vector<LatticeField> in_factors)
    : support_(std::move(support)),
      dim_out_(dim_out),
      dim_in_(dim_in),
      p_(p),
      s_(s),
      out_factors_(std::move(out_factors)),
      in_factors_(std::move(in_factors)) {
    check_exponents(p_, s_, "DiscreteDecomposition");
    if (out_factors_.size() != in_factors_.size()) {
        throw ValidationError("DiscreteDecomposition: factor sequences must pair up");
    }
    summability_ = 0.0;
    for (std::size_t k = 0; k < out_factors_.size(); ++k) {
        const auto& h = out_factors_[k];
        const auto& g = in_factors_[k];
        if (!(h.support() == support_) || !(g.support() == support_)) {
            throw ValidationError("DiscreteDecomposition: factors must share the support window");
        }
        if (h.fiber_dim() != dim_out_ || g.fiber_dim() != dim_in_) {
            throw ValidationError("DiscreteDecomposition: factor fiber dimensions mismatch");
        }
        summability_ += std::pow(discrete_lp_norm(h, p_conj()), s_) *
                        std::pow(discrete_lp_norm(g, p_), s_);
    }
}

Complex bilinear_pairing(const VectorField& u, const VectorField& v) {
    if (u.grid() != v.grid() || u.fiber_dim() != v.fiber_dim()) {
        throw ValidationError("bilinear_pairing: fields must share grid and fiber dimension");
    }
    Complex acc(0.0, 0.0);
    for (Index j = 0; j < u.grid().size(); ++j) {
        acc += u.samples().col(j).cwiseProduct(v.samples().col(j)).sum();
    }
    return acc * u.grid().quadrature_weight();
}

Complex bilinear_pairing(const LatticeField& u, const LatticeField& v) {
    if (!(u.support() == v.support()) || u.fiber_dim() != v.fiber_dim()) {
        throw ValidationError("bilinear_pairing: fields must share support and fiber dimension");
    }
    Complex acc(0.0, 0.0);
    for (Index j = 0; j < u.support().size(); ++j) {
        acc += u.values().col(j).cwiseProduct(v.values().col(j)).sum();
    }
    return acc;
}

VectorField kernel_operator(const NuclearDecomposition& dec, const VectorField& f) {
    if (f.grid() != dec.grid() || f.fiber_dim() != dec.dim_in()) {
        throw ValidationError("kernel_operator: field does not match the decomposition");
    }
    Matrix out = Matrix::Zero(dec.dim_out(), dec.grid().size());
    for (Index k = 0; k < dec.terms(); ++k) {
        const Complex weight = bilinear_pairing(f, dec.in_factors()[static_cast<std::size_t>(k)]);
        out += weight * dec.out_factors()[static_cast<std::size_t>(k)].samples();
    }
    return VectorField(dec.grid(), std::move(out));
}

LatticeField kernel_operator(const DiscreteDecomposition& dec, const LatticeField& f) {
    if (!(f.support() == dec.support()) || f.fiber_dim() != dec.dim_in()) {
        throw ValidationError("kernel_operator: field does not match the decomposition");
    }
    Matrix out = Matrix::Zero(dec.dim_out(), dec.support().size());
    for (Index k = 0; k < dec.terms(); ++k) {
        const Complex weight = bilinear_pairing(f, dec.in_factors()[static_cast<std::size_t>(k)]);
        out += weight * dec.out_factors()[static_cast<std::size_t>(k)].values();
    }
    return LatticeField(dec.support(), std::move(out));
}

SymbolTable decomposition_to_symbol(const NuclearDecomposition& dec,
                                    const FrequencyWindow& window) {
    const TorusGrid& grid = dec.grid();
    if (grid.dim() != window.dim()) {
        throw ValidationError("decomposition_to_symbol: window dimension mismatch");
    }
    std::vector<FourierCoefficients> in_hats;
    in_hats.reserve(static_cast<std::size_t>(dec.terms()));
    for (const auto& g : dec.in_factors()) in_hats.push_back(forward_vft(g, window));

    const auto roots = unit_roots(grid.samples_per_axis());
    std::vector<Matrix> values;
    values.reserve(static_cast<std::size_t>(grid.size() * window.size()));
    for (Index j = 0; j < grid.size(); ++j) {
        for (Index k = 0; k < window.size(); ++k) {
            const Complex phase =
                std::conj(roots[static_cast<std::size_t>(grid.dot_mod(j, window.frequency(k)))]);
            Matrix acc = Matrix::Zero(dec.dim_out(), dec.dim_in());
            const Index neg = window.negated_index(k);
            for (Index t = 0; t < dec.terms(); ++t) {
                acc += dec.out_factors()[static_cast<std::size_t>(t)].samples().col(j) *
                       in_hats[static_cast<std::size_t>(t)].values().col(neg).transpose();
            }
            values.push_back(phase * acc);
        }
    }
    return SymbolTable(grid, window, dec.dim_out(), dec.dim_in(), std::move(values),
                       TailSpec::zero);
}

DiscreteSymbol discrete_decomposition_to_symbol(const DiscreteDecomposition& dec) {
    const FrequencyWindow& support = dec.support();
    const FrequencyWindow dual(support.dim(), 2 * support.radius());
    std::vector<Matrix> coeffs(static_cast<std::size_t>(support.size() * dual.size()),
                               Matrix::Zero(dec.dim_out(), dec.dim_in()));
    std::vector<int> shifted(static_cast<std::size_t>(support.dim()));
    for (Index x = 0; x < support.size(); ++x) {
        const auto site = support.frequency(x);
        for (Index k = 0; k < dual.size(); ++k) {
            const auto kappa = dual.frequency(k);
            for (int a = 0; a < support.dim(); ++a) {
                shifted[static_cast<std::size_t>(a)] = site[a] + kappa[a];
            }
            if (!support.contains(shifted)) continue;
            const Index y = support.index_of(shifted);
            Matrix acc = Matrix::Zero(dec.dim_out(), dec.dim_in());
            for (Index t = 0; t < dec.terms(); ++t) {
                acc += dec.out_factors()[static_cast<std::size_t>(t)].values().col(x) *
                       dec.in_factors()[static_cast<std::size_t>(t)].values().col(y).transpose();
            }
            coeffs[static_cast<std::size_t>(x * dual.size() + k)] = std::move(acc);
        }
    }
    return DiscreteSymbol(support, dual, dec.dim_out(), dec.dim_in(), std::move(coeffs));
}

std::string to_text(const TraceReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "nuclear_trace_re " << report.nuclear.real() << "\n";
    out << "nuclear_trace_im " << report.nuclear.imag() << "\n";
    out << "spectral_trace_re " << report.spectral.real() << "\n";
    out << "spectral_trace_im " << report.spectral.imag() << "\n";
    out << "discrepancy " << report.discrepancy << "\n";
    out << "frequencies " << report.per_frequency.size() << "\n";
    return out.str();
}

std::string to_json_text(const TraceReport& report) {
    nlohmann::json out;
    out["nuclear_trace"] = {report.nuclear.real(), report.nuclear.imag()};
    out["spectral_trace"] = {report.spectral.real(), report.spectral.imag()};
    out["discrepancy"] = report.discrepancy;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& q : report.per_frequency) rows.push_back({q.real(), q.imag()});
    out["per_frequency"] = rows;
    return out.dump(2);
}

SummabilityReport summability_check(const SymbolTable& sigma, double s, double p2) {
    if (!(s > 0.0) || s > 1.0) throw ValidationError("summability_check: s must lie in (0, 1]");
    if (p2 < 1.0 || !std::isfinite(p2)) {
        throw ValidationError("summability_check: p2 must lie in [1, inf)");
    }
    const FrequencyWindow& window = sigma.window();
    SummabilityReport report;
    report.s = s;
    report.p2 = p2;
    std::vector<double> shell_sum(static_cast<std::size_t>(window.radius()) + 1, 0.0);
    for (Index k = 0; k < window.size(); ++k) {
        for (int alpha = 0; alpha < sigma.dim_in(); ++alpha) {
            double norm_x;
            if (sigma.is_multiplier()) {
                norm_x = sigma.value(k).col(alpha).norm();
            } else {
                const TorusGrid& grid = sigma.grid();
                double acc = 0.0;
                for (Index j = 0; j < grid.size(); ++j) {
                    acc += std::pow(sigma.value(j, k).col(alpha).norm(), p2);
                }
                norm_x = std::pow(acc * grid.quadrature_weight(), 1.0 / p2);
            }
            shell_sum[static_cast<std::size_t>(window.shell(k))] += std::pow(norm_x, s);
        }
    }
    double cumulative = 0.0;
    for (int r = 0; r <= window.radius(); ++r) {
        cumulative += shell_sum[static_cast<std::size_t>(r)];
        report.shells.push_back(ShellRow{r, shell_sum[static_cast<std::size_t>(r)], cumulative});
    }
    fill_trend(report.shells, report.ratios, report.summable_trend);
    return report;
}

namespace {

Complex frequency_trace(const SymbolTable& sigma, Index k) {
    if (sigma.is_multiplier()) return sigma.value(k).trace();
    const TorusGrid& grid = sigma.grid();
    Complex acc(0.0, 0.0);
    for (Index j = 0; j < grid.size(); ++j) acc += sigma.value(j, k).trace();
    return acc * grid.quadrature_weight();
}

}  // namespace

TraceReport nuclear_trace_pdo(const SymbolTable& sigma) {
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("nuclear_trace_pdo: square fibers required");
    }
    TraceReport report;
    report.per_frequency.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const Complex q = frequency_trace(sigma, k);
        report.per_frequency.push_back(q);
        report.nuclear += q;
    }
    report.spectral = eigenvalue_sum(assemble_matrix(sigma).matrix);
    report.discrepancy = std::abs(report.nuclear - report.spectral);
    return report;
}

TraceReport nuclear_trace_multiplier(const SymbolTable& sigma) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("nuclear_trace_multiplier: multiplier variant required");
    }
    return nuclear_trace_pdo(sigma);
}

PositiveTraceReport positive_trace_formula(const SymbolTable& sigma, std::uint64_t seed) {
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("positive_trace_formula: square fibers required");
    }
    const Index points = sigma.is_multiplier() ? 1 : sigma.grid().size();
    for (Index j = 0; j < points; ++j) {
        for (Index k = 0; k < sigma.window().size(); ++k) {
            const Matrix& v = sigma.value(j, k);
            const double herm_defect = (v - v.adjoint()).norm();
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (v + v.adjoint()));
            const double min_eig = es.eigenvalues().minCoeff();
            if (herm_defect > 1e-10 * std::max(1.0, v.norm()) || min_eig < -1e-10) {
                std::ostringstream msg;
                msg << "positive_trace_formula: value at grid point " << j << ", xi index " << k
                    << " is not Hermitian positive semidefinite (defect " << herm_defect
                    << ", min eigenvalue " << min_eig << ")";
                throw ValidationError(msg.str());
            }
        }
    }

    PositiveTraceReport report;
    report.base = nuclear_trace_pdo(sigma);

    // basis-independence witness: same formula after a fiber basis change
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(sigma.dim_in(), sigma.dim_in());
    for (Index i = 0; i < g.rows(); ++i) {
        for (Index j2 = 0; j2 < g.cols(); ++j2) g(i, j2) = Complex(normal(rng), normal(rng));
    }
    const Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix unitary = qr.householderQ();

    Complex conjugated(0.0, 0.0);
    for (Index k = 0; k < sigma.window().size(); ++k) {
        if (sigma.is_multiplier()) {
            conjugated += (unitary.adjoint() * sigma.value(k) * unitary).trace();
        } else {
            Complex acc(0.0, 0.0);
            for (Index j = 0; j < sigma.grid().size(); ++j) {
                acc += (unitary.adjoint() * sigma.value(j, k) * unitary).trace();
            }
            conjugated += acc * sigma.grid().quadrature_weight();
        }
    }
    report.conjugated = conjugated;
    report.witness_discrepancy = std::abs(conjugated - report.base.nuclear);
    return report;
}

DecayReport decay_norm(const SymbolTable& sigma, double p_conj) {
    if (p_conj <= 1.0) throw ValidationError("decay_norm: p' must exceed 1");
    const FrequencyWindow& window = sigma.window();
    DecayReport report;
    report.p_conj = p_conj;
    std::vector<double> shell_sum(static_cast<std::size_t>(window.radius()) + 1, 0.0);
    for (Index k = 0; k < window.size(); ++k) {
        double contribution = 0.0;
        if (sigma.is_multiplier()) {
            contribution = std::pow(operator_norm(sigma.value(k)), p_conj);
        } else {
            const TorusGrid& grid = sigma.grid();
            for (Index j = 0; j < grid.size(); ++j) {
                contribution += std::pow(operator_norm(sigma.value(j, k)), p_conj);
            }
            contribution *= grid.quadrature_weight();
        }
        shell_sum[static_cast<std::size_t>(window.shell(k))] += contribution;
    }
    double cumulative = 0.0;
    for (int r = 0; r <= window.radius(); ++r) {
        cumulative += shell_sum[static_cast<std::size_t>(r)];
        report.shells.push_back(ShellRow{r, shell_sum[static_cast<std::size_t>(r)], cumulative});
    }
    report.norm = std::pow(cumulative, 1.0 / p_conj);
    fill_trend(report.shells, report.ratios, report.summable_trend);
    return report;
}

namespace {

int default_discrete_quadrature(const DiscreteSymbol& a) {
    return 4 * a.dual().radius() + 3;
}

}  // namespace

DecayReport decay_norm(const DiscreteSymbol& a, double p_conj, int quad_samples) {
    if (p_conj <= 1.0) throw ValidationError("decay_norm: p' must exceed 1");
    if (quad_samples == 0) quad_samples = default_discrete_quadrature(a);
    if (quad_samples < 2) throw ValidationError("decay_norm: quadrature grid too coarse");
    const TorusGrid quad(a.lattice().dim(), quad_samples);
    DecayReport report;
    report.p_conj = p_conj;
    std::vector<double> shell_sum(static_cast<std::size_t>(a.lattice().radius()) + 1, 0.0);
    for (Index x = 0; x < a.lattice().size(); ++x) {
        double acc = 0.0;
        for (Index q = 0; q < quad.size(); ++q) {
            const auto xi = quad.coordinates(q);
            acc += std::pow(operator_norm(a.eval(x, xi)), p_conj);
        }
        shell_sum[static_cast<std::size_t>(a.lattice().shell(x))] +=
            acc * quad.quadrature_weight();
    }
    double cumulative = 0.0;
    for (int r = 0; r <= a.lattice().radius(); ++r) {
        cumulative += shell_sum[static_cast<std::size_t>(r)];
        report.shells.push_back(ShellRow{r, shell_sum[static_cast<std::size_t>(r)], cumulative});
    }
    report.norm = std::pow(cumulative, 1.0 / p_conj);
    fill_trend(report.shells, report.ratios, report.summable_trend);
    return report;
}

double discrete_transform_lp_norm(const LatticeField& g, double p_conj, int quad_samples) {
    if (p_conj <= 1.0) throw ValidationError("discrete_transform_lp_norm: p' must exceed 1");
    if (quad_samples < 2) throw ValidationError("discrete_transform_lp_norm: grid too coarse");
    const TorusGrid quad(g.support().dim(), quad_samples);
    const auto roots = unit_roots(quad_samples);
    double acc = 0.0;
    for (Index q = 0; q < quad.size(); ++q) {
        Vector hat = Vector::Zero(g.fiber_dim());
        for (Index y = 0; y < g.support().size(); ++y) {
            // F_{Z^n} g(-xi_q) = sum_y exp(+2 pi i y.xi_q) g(y)
            hat += roots[static_cast<std::size_t>(quad.dot_mod(q, g.support().frequency(y)))] *
                   g.values().col(y);
        }
        acc += std::pow(hat.norm(), p_conj);
    }
    return std::pow(acc * quad.quadrature_weight(), 1.0 / p_conj);
}

double schatten_norm(const Matrix& m, double s) {
    if (!(s > 0.0)) throw ValidationError("schatten_norm: s must be positive");
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    double acc = 0.0;
    for (Index i = 0; i < sv.size(); ++i) acc += std::pow(sv(i), s);
    return std::pow(acc, 1.0 / s);
}

TraceReport grothendieck_check(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("grothendieck_check: square matrix required");
    TraceReport report;
    report.nuclear = m.trace();
    report.spectral = eigenvalue_sum(m);
    report.discrepancy = std::abs(report.nuclear - report.spectral);
    return report;
}

namespace {

VectorField random_band_limited(const TorusGrid& grid, const FrequencyWindow& window, int dim,
                                std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix coeffs(dim, window.size());
    for (Index k = 0; k < window.size(); ++k) {
        const double envelope = 1.0 / (1.0 + window.euclidean_norm(k));
        for (int i = 0; i < dim; ++i) {
            coeffs(i, k) = envelope * Complex(normal(rng), normal(rng));
        }
    }
    return inverse_vft(FourierCoefficients(window, std::move(coeffs)), grid);
}

}  // namespace

NuclearDecomposition random_periodic_decomposition(const TorusGrid& grid,
                                                   const FrequencyWindow& window, int dim,
                                                   Index terms, double p, double s,
                                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<VectorField> out_factors;
    std::vector<VectorField> in_factors;
    out_factors.reserve(static_cast<std::size_t>(terms));
    in_factors.reserve(static_cast<std::size_t>(terms));
    for (Index k = 0; k < terms; ++k) {
        out_factors.push_back(random_band_limited(grid, window, dim, rng));
        in_factors.push_back(random_band_limited(grid, window, dim, rng));
    }
    return NuclearDecomposition(grid, dim, dim, p, s, std::move(out_factors),
                                std::move(in_factors));
}

DiscreteDecomposition random_discrete_decomposition(const FrequencyWindow& support, int dim,
                                                    Index terms, double p, double s,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<LatticeField> out_factors;
    std::vector<LatticeField> in_factors;
    for (Index t = 0; t < terms; ++t) {
        for (int side = 0; side < 2; ++side) {
            Matrix values(dim, support.size());
            for (Index x = 0; x < support.size(); ++x) {
                const double envelope = 1.0 / (1.0 + support.euclidean_norm(x));
                for (int i = 0; i < dim; ++i) {
                    values(i, x) = envelope * Complex(normal(rng), normal(rng));
                }
            }
            if (side == 0) {
                out_factors.emplace_back(support, std::move(values));
            } else {
                in_factors.emplace_back(support, std::move(values));
            }
        }
    }
    return DiscreteDecomposition(support, dim, dim, p, s, std::move(out_factors),
                                 std::move(in_factors));
}

}  // namespace torpsido
