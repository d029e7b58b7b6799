#pragma once

#include "torpsido/nuclearity.hpp"

#include <filesystem>

namespace torpsido {

// Binary container, little-endian throughout:
//   magic "TPSD" | version u16 = 1 | kind u16 | u32 header fields | payload
// kinds and their header fields:
//   1 VectorField          n, M, d
//   2 FourierCoefficients  n, N, d
//   3 SymbolTable (mult)   n, N, d_out, d_in, tail
//   4 SymbolTable (full)   n, N, M, d_out, d_in, tail
//   5 AssembledOperator    n, N, d_out, d_in
//   6 LatticeField         n, N, d
//   7 ScalarBisymbol       n, m, N_xi, N_eta, M_y, then f64 order, rho, delta
// Payload is interleaved re/im float64: fields and coefficients are
// enumeration-major and fiber-minor; symbol values and assembled matrices are
// row-major per matrix (full tables point-major, then frequency); bisymbols
// are point-major, then xi, then eta.

void write_field(const std::filesystem::path& path, const VectorField& field);
VectorField read_field(const std::filesystem::path& path);

void write_coefficients(const std::filesystem::path& path, const FourierCoefficients& coeffs);
FourierCoefficients read_coefficients(const std::filesystem::path& path);

void write_symbol(const std::filesystem::path& path, const SymbolTable& sigma);
SymbolTable read_symbol(const std::filesystem::path& path);

void write_assembled(const std::filesystem::path& path, const AssembledOperator& op);
AssembledOperator read_assembled(const std::filesystem::path& path);

void write_lattice_field(const std::filesystem::path& path, const LatticeField& field);
LatticeField read_lattice_field(const std::filesystem::path& path);

void write_bisymbol(const std::filesystem::path& path, const ScalarBisymbol& b);
ScalarBisymbol read_bisymbol(const std::filesystem::path& path);

/// Decomposition manifest (JSON: terms, p, s, dims) next to one container per
/// factor: <prefix>-manifest.json, <prefix>-h<k>.tpsd, <prefix>-g<k>.tpsd.
/// Returns / expects the manifest path.
std::filesystem::path write_decomposition(const std::filesystem::path& prefix,
                                          const NuclearDecomposition& dec);
NuclearDecomposition read_decomposition(const std::filesystem::path& manifest_path);

/// Debug CSV: one row per grid point / frequency, multi-index columns first,
/// then re/im per fiber component.
void write_field_csv(const std::filesystem::path& path, const VectorField& field);
void write_coefficients_csv(const std::filesystem::path& path, const FourierCoefficients& coeffs);

/// Matrix Market export; array format by default, coordinate format writes
/// the nonzero entries only (structural zeros of multipliers drop out).
void write_matrix_market(const std::filesystem::path& path, const Matrix& m,
                         bool coordinate = false);

}  // namespace torpsido
