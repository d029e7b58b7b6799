#include "torpsido/lattice.hpp"

#include "torpsido/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace torpsido {

namespace {

Index checked_power(Index base, int exp, const char* what) {
    Index out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > (1 << 28) / base) {
            throw ValidationError(std::string(what) + ": enumeration too large");
        }
        out *= base;
    }
    return out;
}

}  // namespace

FrequencyWindow::FrequencyWindow(int dim, int radius) : dim_(dim), radius_(radius) {
    if (dim < 1) throw ValidationError("FrequencyWindow: dimension must be positive");
    if (radius < 0) throw ValidationError("FrequencyWindow: radius must be nonnegative");
    const Index side = 2 * static_cast<Index>(radius) + 1;
    size_ = checked_power(side, dim, "FrequencyWindow");
    freqs_.resize(static_cast<std::size_t>(size_) * dim_);
    std::vector<int> xi(dim_, -radius_);
    for (Index k = 0; k < size_; ++k) {
        for (int a = 0; a < dim_; ++a) freqs_[k * dim_ + a] = xi[a];
        for (int a = dim_ - 1; a >= 0; --a) {  // odometer, last coordinate fastest
            if (xi[a] < radius_) {
                ++xi[a];
                break;
            }
            xi[a] = -radius_;
        }
    }
}

Index FrequencyWindow::index_of(std::span<const int> xi) const {
    if (static_cast<int>(xi.size()) != dim_) {
        throw ValidationError("FrequencyWindow::index_of: dimension mismatch");
    }
    Index k = 0;
    const Index side = 2 * static_cast<Index>(radius_) + 1;
    for (int a = 0; a < dim_; ++a) {
        if (xi[a] < -radius_ || xi[a] > radius_) {
            std::ostringstream msg;
            msg << "FrequencyWindow::index_of: component " << xi[a] << " outside radius " << radius_;
            throw ValidationError(msg.str());
        }
        k = k * side + (xi[a] + radius_);
    }
    return k;
}

bool FrequencyWindow::contains(std::span<const int> xi) const {
    if (static_cast<int>(xi.size()) != dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (xi[a] < -radius_ || xi[a] > radius_) return false;
    }
    return true;
}

int FrequencyWindow::shell(Index k) const {
    int s = 0;
    const auto xi = frequency(k);
    for (int a = 0; a < dim_; ++a) s = std::max(s, std::abs(xi[a]));
    return s;
}

double FrequencyWindow::euclidean_norm(Index k) const {
    double s = 0;
    const auto xi = frequency(k);
    for (int a = 0; a < dim_; ++a) s += static_cast<double>(xi[a]) * xi[a];
    return std::sqrt(s);
}

TorusGrid::TorusGrid(int dim, int samples_per_axis) : dim_(dim), samples_(samples_per_axis) {
    if (dim < 1) throw ValidationError("TorusGrid: dimension must be positive");
    if (samples_per_axis < 2) throw ValidationError("TorusGrid: need at least 2 samples per axis");
    size_ = checked_power(samples_, dim_, "TorusGrid");
}

std::vector<int> TorusGrid::point(Index k) const {
    std::vector<int> j(dim_);
    for (int a = dim_ - 1; a >= 0; --a) {
        j[a] = static_cast<int>(k % samples_);
        k /= samples_;
    }
    return j;
}

std::vector<double> TorusGrid::coordinates(Index k) const {
    const auto j = point(k);
    std::vector<double> x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(j[a]) / samples_;
    return x;
}

int TorusGrid::dot_mod(Index k, std::span<const int> xi) const {
    int r = 0;
    for (int a = dim_ - 1; a >= 0; --a) {
        const int j = static_cast<int>(k % samples_);
        k /= samples_;
        r = (r + j * (((xi[a] % samples_) + samples_) % samples_)) % samples_;
    }
    return r;
}

std::vector<Complex> unit_roots(int samples_per_axis) {
    std::vector<Complex> roots(static_cast<std::size_t>(samples_per_axis));
    for (int r = 0; r < samples_per_axis; ++r) {
        const double angle = 2.0 * std::numbers::pi * r / samples_per_axis;
        roots[static_cast<std::size_t>(r)] = Complex(std::cos(angle), std::sin(angle));
    }
    return roots;
}

VectorField::VectorField(TorusGrid grid, int fiber_dim)
    : grid_(grid), samples_(Matrix::Zero(fiber_dim, grid.size())) {
    if (fiber_dim < 1) throw ValidationError("VectorField: fiber dimension must be positive");
}

VectorField::VectorField(TorusGrid grid, Matrix samples) : grid_(grid), samples_(std::move(samples)) {
    if (samples_.cols() != grid_.size()) {
        throw ValidationError("VectorField: sample count does not match grid size");
    }
    if (samples_.rows() < 1) throw ValidationError("VectorField: fiber dimension must be positive");
}

FourierCoefficients::FourierCoefficients(FrequencyWindow window, int fiber_dim)
    : window_(std::move(window)), values_(Matrix::Zero(fiber_dim, window_.size())) {
    if (fiber_dim < 1) throw ValidationError("FourierCoefficients: fiber dimension must be positive");
}

FourierCoefficients::FourierCoefficients(FrequencyWindow window, Matrix values)
    : window_(std::move(window)), values_(std::move(values)) {
    if (values_.cols() != window_.size()) {
        throw ValidationError("FourierCoefficients: one value per window frequency required");
    }
    if (!values_.allFinite()) {
        throw ValidationError("FourierCoefficients: non-finite entries");
    }
}

LatticeField::LatticeField(FrequencyWindow support, int fiber_dim)
    : support_(std::move(support)), values_(Matrix::Zero(fiber_dim, support_.size())) {
    if (fiber_dim < 1) throw ValidationError("LatticeField: fiber dimension must be positive");
}

LatticeField::LatticeField(FrequencyWindow support, Matrix values)
    : support_(std::move(support)), values_(std::move(values)) {
    if (values_.cols() != support_.size()) {
        throw ValidationError("LatticeField: one value per support site required");
    }
}

FourierCoefficients forward_vft(const VectorField& field, const FrequencyWindow& window) {
    const TorusGrid& grid = field.grid();
    if (grid.dim() != window.dim()) {
        throw ValidationError("forward_vft: grid and window dimensions differ");
    }
    if (grid.samples_per_axis() < 2 * window.radius() + 1) {
        throw ValidationError("forward_vft: grid too coarse for the window (need M >= 2N+1)");
    }
    const auto roots = unit_roots(grid.samples_per_axis());
    Matrix out = Matrix::Zero(field.fiber_dim(), window.size());
    for (Index k = 0; k < window.size(); ++k) {
        const auto xi = window.frequency(k);
        Vector acc = Vector::Zero(field.fiber_dim());
        for (Index j = 0; j < grid.size(); ++j) {
            const int r = grid.dot_mod(j, xi);
            acc += std::conj(roots[static_cast<std::size_t>(r)]) * field.samples().col(j);
        }
        out.col(k) = acc * grid.quadrature_weight();
    }
    return FourierCoefficients(window, std::move(out));
}

VectorField inverse_vft(const FourierCoefficients& coeffs, const TorusGrid& grid) {
    const FrequencyWindow& window = coeffs.window();
    if (grid.dim() != window.dim()) {
        throw ValidationError("inverse_vft: grid and window dimensions differ");
    }
    if (grid.samples_per_axis() < 2 * window.radius() + 1) {
        throw ValidationError("inverse_vft: grid too coarse for the window (need M >= 2N+1)");
    }
    const auto roots = unit_roots(grid.samples_per_axis());
    Matrix out = Matrix::Zero(coeffs.fiber_dim(), grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        Vector acc = Vector::Zero(coeffs.fiber_dim());
        for (Index k = 0; k < window.size(); ++k) {
            const int r = grid.dot_mod(j, window.frequency(k));
            acc += roots[static_cast<std::size_t>(r)] * coeffs.values().col(k);
        }
        out.col(j) = acc;
    }
    return VectorField(grid, std::move(out));
}

double lp_norm(const VectorField& field, double p) {
    if (p < 1.0) throw ValidationError("lp_norm: p must be >= 1");
    if (!std::isfinite(p)) throw ValidationError("lp_norm: p must be finite");
    double acc = 0;
    for (Index j = 0; j < field.grid().size(); ++j) {
        acc += std::pow(field.samples().col(j).norm(), p);
    }
    return std::pow(acc * field.grid().quadrature_weight(), 1.0 / p);
}

double discrete_lp_norm(const LatticeField& field, double p) {
    if (p < 1.0) throw ValidationError("discrete_lp_norm: p must be >= 1");
    if (!std::isfinite(p)) throw ValidationError("discrete_lp_norm: p must be finite");
    double acc = 0;
    for (Index j = 0; j < field.support().size(); ++j) {
        acc += std::pow(field.values().col(j).norm(), p);
    }
    return std::pow(acc, 1.0 / p);
}

VectorField character_field(const TorusGrid& grid, std::span<const int> eta, const Vector& v) {
    if (static_cast<int>(eta.size()) != grid.dim()) {
        throw ValidationError("character_field: frequency dimension mismatch");
    }
    const auto roots = unit_roots(grid.samples_per_axis());
    Matrix out(v.size(), grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        out.col(j) = roots[static_cast<std::size_t>(grid.dot_mod(j, eta))] * v;
    }
    return VectorField(grid, std::move(out));
}

}  // namespace torpsido
