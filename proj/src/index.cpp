#include "torpsido/index.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace torpsido {

namespace {

void check_t_grid(std::span<const double> t_grid, const char* what) {
    if (t_grid.size() < 3) {
        throw ValidationError(std::string(what) + ": t grid needs at least 3 points");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw ValidationError(std::string(what) + ": t grid must be positive");
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    if (hi / lo < 100.0) {
        throw ValidationError(std::string(what) + ": t grid must span at least two decades");
    }
}

std::vector<double> resolve_grid(std::span<const double> t_grid) {
    if (t_grid.empty()) return default_heat_grid();
    return {t_grid.begin(), t_grid.end()};
}

// Eigenvalues of the Hermitian part, sorted ascending.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double heat_trace_from_eigs(const Eigen::VectorXd& eigs, double t) {
    double acc = 0.0;
    for (Index i = 0; i < eigs.size(); ++i) acc += std::exp(-t * eigs(i));
    return acc;
}

}  // namespace

std::vector<double> default_heat_grid() { return {0.01, 0.1, 1.0, 10.0}; }

std::vector<double> default_ellipticity_grid() {
    std::vector<double> grid(16);
    const double lo = std::log10(1e-3);
    const double hi = std::log10(1e2);
    for (int i = 0; i < 16; ++i) {
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / 15.0);
    }
    return grid;
}

MatrixIndexResult matrix_index(const Matrix& m, double tol) {
    if (!(tol > 0.0)) throw ValidationError("matrix_index: tol must be positive");
    const Index rows = m.rows();
    const Index cols = m.cols();
    Eigen::JacobiSVD<Matrix> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();  // sorted descending
    const double smax = sv.size() > 0 ? sv(0) : 0.0;

    MatrixIndexResult result;
    result.threshold = tol * smax;
    Index small = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) < result.threshold) ++small;
    }
    if (smax == 0.0) small = sv.size();  // zero matrix: everything is kernel

    result.kernel_dim = (cols - sv.size()) + small;
    result.cokernel_dim = (rows - sv.size()) + small;
    result.index = static_cast<long>(result.kernel_dim) - static_cast<long>(result.cokernel_dim);

    // gap bracketing the threshold
    double below = -1.0;
    double above = -1.0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) >= result.threshold) {
            above = above < 0 ? sv(i) : std::min(above, sv(i));
        } else {
            below = std::max(below, sv(i));
        }
    }
    if (below >= 0 && above >= 0) {
        result.gap = above - below;
        result.ambiguous = result.gap < 10.0 * std::numeric_limits<double>::epsilon() * smax;
    }
    return result;
}

McKeanSingerResult mckean_singer(const Matrix& m, std::span<const double> t_grid,
                                 double rank_tol) {
    check_t_grid(t_grid, "mckean_singer");
    McKeanSingerResult result;
    result.t_grid.assign(t_grid.begin(), t_grid.end());
    const Eigen::VectorXd source_eigs = hermitian_eigenvalues(m.adjoint() * m);
    const Eigen::VectorXd target_eigs = hermitian_eigenvalues(m * m.adjoint());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        const double value = heat_trace_from_eigs(source_eigs, t) -
                             heat_trace_from_eigs(target_eigs, t);
        result.values.push_back(value);
        lo = std::min(lo, value);
        hi = std::max(hi, value);
    }
    result.spread = hi - lo;
    result.svd_index = matrix_index(m, rank_tol).index;
    result.consistent = true;
    for (double v : result.values) {
        if (std::abs(v - static_cast<double>(result.svd_index)) > 1e-8) result.consistent = false;
    }
    return result;
}

IndexReport multiplier_index(const SymbolTable& sigma, double rank_tol,
                             std::span<const double> t_grid) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("multiplier_index: multiplier variant required");
    }
    if (sigma.tail() == TailSpec::undeclared) {
        throw ValidationError(
            "multiplier_index: undeclared tail refused; the index sum is not well-defined "
            "under truncation without a tail declaration");
    }

    IndexReport report;
    report.rank_tol = rank_tol;
    if (sigma.tail() == TailSpec::invertible_identity_like) {
        report.tail_note =
            "invertible-identity-like tail: frequencies outside the window contribute index 0, "
            "so the window sum equals the full lattice sum";
    } else {
        std::ostringstream note;
        note << "zero tail: the reported total covers the window only; each tail frequency is a "
             << "zero map of index " << (sigma.dim_in() - sigma.dim_out());
        report.tail_note = note.str();
    }

    for (Index k = 0; k < sigma.window().size(); ++k) {
        const MatrixIndexResult r = matrix_index(sigma.value(k), rank_tol);
        report.per_frequency.push_back(
            PerFrequencyIndex{k, r.kernel_dim, r.cokernel_dim, r.index, r.ambiguous});
        report.total += r.index;
    }

    const AssembledOperator op = assemble_matrix(sigma);
    report.assembled_index = matrix_index(op.matrix, rank_tol).index;

    const std::vector<double> grid = resolve_grid(t_grid);
    const McKeanSingerResult ms = mckean_singer(op.matrix, grid, rank_tol);
    report.ms_t_grid = ms.t_grid;
    report.ms_values = ms.values;
    report.ms_spread = ms.spread;
    return report;
}

HeatTraceReport heat_trace_sum(const SymbolTable& sigma, double t) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("heat_trace_sum: multiplier variant required");
    }
    if (!(t > 0.0)) throw ValidationError("heat_trace_sum: t must be positive");

    HeatTraceReport report;
    report.t = t;
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const Matrix& s = sigma.value(k);
        const Complex src = hermitian_semigroup_exp(s.adjoint() * s, t).trace();
        const Complex tgt = hermitian_semigroup_exp(s * s.adjoint(), t).trace();
        report.per_frequency_source.push_back(src);
        report.per_frequency_target.push_back(tgt);
        report.summed_source += src;
        report.summed_target += tgt;
    }

    const AssembledOperator op = assemble_matrix(sigma);
    report.assembled_source =
        heat_trace_from_eigs(hermitian_eigenvalues(op.matrix.adjoint() * op.matrix), t);
    report.assembled_target =
        heat_trace_from_eigs(hermitian_eigenvalues(op.matrix * op.matrix.adjoint()), t);
    report.discrepancy_source = std::abs(report.assembled_source - report.summed_source);
    report.discrepancy_target = std::abs(report.assembled_target - report.summed_target);
    return report;
}

namespace {

// log |exp(-t H) e_alpha| for Hermitian PSD H with eigendecomposition (Q, lambda),
// via log-sum-exp so large t*lambda cannot underflow to -inf prematurely.
// Weights at the eigenvector roundoff floor are structural zeros; otherwise
// every slow mode picks up an eps-sized ghost component that caps the decay
// rate near lambda_min once t(lambda - lambda_min) exceeds |2 log eps|.
double log_heat_column_norm(const Matrix& q, const Eigen::VectorXd& eigs, Index alpha, double t) {
    const double floor =
        std::pow(static_cast<double>(q.rows()) * std::numeric_limits<double>::epsilon(), 2.0);
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(eigs.size()));
    for (Index i = 0; i < eigs.size(); ++i) {
        const double weight = std::norm(q(alpha, i));
        if (weight <= floor) continue;
        const double term = -2.0 * t * eigs(i) + std::log(weight);
        terms.push_back(term);
        peak = std::max(peak, term);
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (double term : terms) acc += std::exp(term - peak);
    return 0.5 * (peak + std::log(acc));
}

}  // namespace

EllipticityReport mb_ellipticity_report(const SymbolTable& sigma, double m,
                                        std::span<const double> t_grid) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("mb_ellipticity_report: multiplier variant required");
    }
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("mb_ellipticity_report: square fibers required");
    }
    EllipticityReport report;
    report.exponent_m = m;
    report.t_grid = t_grid.empty() ? default_ellipticity_grid()
                                   : std::vector<double>(t_grid.begin(), t_grid.end());
    for (double t : report.t_grid) {
        if (!(t > 0.0)) throw ValidationError("mb_ellipticity_report: t grid must be positive");
    }

    const int d = sigma.dim_in();
    double admissible = std::numeric_limits<double>::infinity();
    double admissible_bracket = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const Matrix& s = sigma.value(k);
        Eigen::SelfAdjointEigenSolver<Matrix> source(
            0.5 * (s.adjoint() * s + (s.adjoint() * s).adjoint()));
        Eigen::SelfAdjointEigenSolver<Matrix> target(
            0.5 * (s * s.adjoint() + (s * s.adjoint()).adjoint()));
        const double xi_norm = sigma.window().euclidean_norm(k);
        for (int alpha = 0; alpha < d; ++alpha) {
            EllipticityRate rate;
            rate.freq = k;
            rate.alpha = alpha;
            rate.fiber_norm = sigma.fiber_index_norms()[static_cast<std::size_t>(alpha)];
            rate.rate_source = std::numeric_limits<double>::infinity();
            rate.rate_target = std::numeric_limits<double>::infinity();
            for (double t : report.t_grid) {
                rate.rate_source = std::min(
                    rate.rate_source,
                    -log_heat_column_norm(source.eigenvectors(), source.eigenvalues(), alpha, t) /
                        t);
                rate.rate_target = std::min(
                    rate.rate_target,
                    -log_heat_column_norm(target.eigenvectors(), target.eigenvalues(), alpha, t) /
                        t);
            }
            const double scale = std::pow(1.0 + rate.fiber_norm + xi_norm, m);
            const double bracket =
                std::pow(std::sqrt(1.0 + xi_norm * xi_norm + rate.fiber_norm * rate.fiber_norm), m);
            admissible = std::min(admissible, std::min(rate.rate_source, rate.rate_target) / scale);
            admissible_bracket = std::min(
                admissible_bracket, std::min(rate.rate_source, rate.rate_target) / bracket);
            report.rates.push_back(rate);
        }
    }
    report.admissible_constant = admissible;
    report.admissible_constant_bracket = admissible_bracket;
    report.positive = admissible > report.margin;
    return report;
}

std::vector<FrequencyRankRow> fredholm_necessity_report(const SymbolTable& sigma, double tol) {
    if (!sigma.is_multiplier()) {
        throw ValidationError("fredholm_necessity_report: multiplier variant required");
    }
    std::vector<FrequencyRankRow> rows;
    rows.reserve(static_cast<std::size_t>(sigma.window().size()));
    for (Index k = 0; k < sigma.window().size(); ++k) {
        const MatrixIndexResult r = matrix_index(sigma.value(k), tol);
        rows.push_back(FrequencyRankRow{k, r.kernel_dim, r.cokernel_dim});
    }
    return rows;
}

HoermanderIndexExperiment periodic_index_experiment(const ScalarBisymbol& b, double rank_tol,
                                                    std::span<const double> t_grid) {
    HoermanderIndexExperiment experiment;
    experiment.bounds = hoermander_bounds_report(b, 1, 1);
    if (!(experiment.bounds.ellipticity_constant > 0.0)) {
        std::ostringstream msg;
        msg << "periodic_index_experiment: ellipticity gate failed (constant "
            << experiment.bounds.ellipticity_constant << " on the window)";
        throw EllipticityGateError(msg.str(), experiment.bounds);
    }

    const SymbolTable realized = hoermander_realize(b, TailSpec::invertible_identity_like);
    experiment.index = multiplier_index(realized, rank_tol, t_grid);

    experiment.paths_agree = experiment.index.total == experiment.index.assembled_index;
    for (double v : experiment.index.ms_values) {
        if (std::abs(v - static_cast<double>(experiment.index.total)) > 1e-8) {
            experiment.paths_agree = false;
        }
    }
    return experiment;
}

}  // namespace torpsido
