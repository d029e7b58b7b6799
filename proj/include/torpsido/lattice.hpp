#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace torpsido {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Truncated dual lattice: all xi in Z^n with |xi|_inf <= N, enumerated
/// lexicographically (last coordinate fastest). The enumeration contains 0,
/// is symmetric under xi -> -xi, and has (2N+1)^n entries.
class FrequencyWindow {
public:
    FrequencyWindow(int dim, int radius);

    int dim() const { return dim_; }
    int radius() const { return radius_; }
    Index size() const { return size_; }

    std::span<const int> frequency(Index k) const {
        return {freqs_.data() + k * dim_, static_cast<std::size_t>(dim_)};
    }

    /// Position of xi in the enumeration; throws if |xi|_inf > N.
    Index index_of(std::span<const int> xi) const;
    bool contains(std::span<const int> xi) const;

    /// Index of -xi. Equals size()-1-k by the symmetric enumeration.
    Index negated_index(Index k) const { return size_ - 1 - k; }

    /// |xi|_inf of the k-th frequency (its shell number).
    int shell(Index k) const;
    /// Euclidean |xi|_2.
    double euclidean_norm(Index k) const;

    friend bool operator==(const FrequencyWindow& a, const FrequencyWindow& b) {
        return a.dim_ == b.dim_ && a.radius_ == b.radius_;
    }

private:
    int dim_;
    int radius_;
    Index size_;
    std::vector<int> freqs_;  // size * dim, row-major
};

/// Uniform sampling grid on T^n: points x_j = j/M componentwise,
/// j in {0..M-1}^n, lexicographic enumeration (last coordinate fastest).
/// Quadrature weight is uniform 1/M^n, exact on trigonometric polynomials
/// of per-axis degree < M.
class TorusGrid {
public:
    TorusGrid(int dim, int samples_per_axis);

    int dim() const { return dim_; }
    int samples_per_axis() const { return samples_; }
    Index size() const { return size_; }
    double quadrature_weight() const { return 1.0 / static_cast<double>(size_); }

    /// Multi-index j of the k-th grid point.
    std::vector<int> point(Index k) const;
    /// Coordinates x_j = j/M of the k-th grid point.
    std::vector<double> coordinates(Index k) const;

    /// (j . xi) mod M for the k-th grid point; xi may have negative entries.
    int dot_mod(Index k, std::span<const int> xi) const;

    friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
        return a.dim_ == b.dim_ && a.samples_ == b.samples_;
    }
    friend bool operator!=(const TorusGrid& a, const TorusGrid& b) { return !(a == b); }

private:
    int dim_;
    int samples_;
    Index size_;
};

/// exp(2*pi*i*r/M) for r = 0..M-1.
std::vector<Complex> unit_roots(int samples_per_axis);

/// C^d-valued samples on a torus grid; column k holds f(x_k).
class VectorField {
public:
    VectorField(TorusGrid grid, int fiber_dim);
    VectorField(TorusGrid grid, Matrix samples);

    const TorusGrid& grid() const { return grid_; }
    int fiber_dim() const { return static_cast<int>(samples_.rows()); }
    const Matrix& samples() const { return samples_; }
    Matrix& samples() { return samples_; }

private:
    TorusGrid grid_;
    Matrix samples_;  // fiber_dim x grid.size()
};

/// C^d-valued Fourier data on a frequency window; column k holds fhat(xi_k).
class FourierCoefficients {
public:
    FourierCoefficients(FrequencyWindow window, int fiber_dim);
    FourierCoefficients(FrequencyWindow window, Matrix values);

    const FrequencyWindow& window() const { return window_; }
    int fiber_dim() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }

private:
    FrequencyWindow window_;
    Matrix values_;  // fiber_dim x window.size()
};

/// C^d-valued function on a finite symmetric box of Z^n (counting measure).
class LatticeField {
public:
    LatticeField(FrequencyWindow support, int fiber_dim);
    LatticeField(FrequencyWindow support, Matrix values);

    const FrequencyWindow& support() const { return support_; }
    int fiber_dim() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }

private:
    FrequencyWindow support_;
    Matrix values_;  // fiber_dim x support.size()
};

/// Analysis transform fhat(xi) = (1/M^n) sum_j exp(-2*pi*i x_j.xi) f(x_j).
/// Exact on fields band-limited to the window when M >= 2N+1.
FourierCoefficients forward_vft(const VectorField& field, const FrequencyWindow& window);

/// Synthesis sum f(x_j) = sum_xi exp(+2*pi*i x_j.xi) c(xi).
VectorField inverse_vft(const FourierCoefficients& coeffs, const TorusGrid& grid);

/// Mixed norm ((1/M^n) sum_j |f(x_j)|_{C^d}^p)^(1/p); requires p >= 1.
double lp_norm(const VectorField& field, double p);

/// Counting-measure norm (sum_x |f(x)|^p)^(1/p); requires p >= 1.
double discrete_lp_norm(const LatticeField& field, double p);

/// Field x -> exp(2*pi*i x.eta) v.
VectorField character_field(const TorusGrid& grid, std::span<const int> eta, const Vector& v);

}  // namespace torpsido
