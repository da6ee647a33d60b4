#pragma once

//
// Fixed-dimension (2x2 / 3x3) symmetric-matrix arithmetic, ordered spectral
// decomposition and wave-cone sampling. Everything here is a pure function
// on values; no shared state.
//

#include <array>
#include <cstddef>
#include <vector>

#include "vmass/rng.hpp"

namespace vmass {

// Symmetric matrix of dimension 2 or 3; only the upper triangle is stored,
// so symmetry holds by construction. Entry order: (0,0) (1,1) (2,2) (0,1)
// (0,2) (1,2); the last two are unused when dim == 2.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int dim);
    SymMat(int dim, const std::array<double, 6>& upper);

    static SymMat zero(int dim) { return SymMat(dim); }
    static SymMat identity(int dim);
    static SymMat diag(int dim, const std::array<double, 3>& d);
    // symmetric rank-one matrix v (x) v
    static SymMat outer(int dim, const std::array<double, 3>& v);
    // from a full row-major matrix; requires symmetry within `tol * scale`
    static SymMat from_rows(int dim, const std::array<double, 9>& rows,
                            double tol = 1e-12);

    int dim() const { return dim_; }
    double operator()(int i, int j) const;
    void set(int i, int j, double v);

    SymMat operator+(const SymMat& o) const;
    SymMat operator-(const SymMat& o) const;
    SymMat operator*(double t) const;
    SymMat& operator+=(const SymMat& o);

    double trace() const;
    double det() const;
    double norm2() const;  // squared Frobenius norm
    double norm() const;
    double max_abs() const;
    bool is_finite() const;

    // row-major dense copy, length dim*dim
    std::array<double, 9> rows() const;

private:
    int dim_ = 2;
    std::array<double, 6> a_{};  // xx yy zz xy xz yz
};

inline SymMat operator*(double t, const SymMat& m) { return m * t; }

// Frobenius scalar product a : b = sum_ij a_ij b_ij. Throws on dim mismatch.
double inner(const SymMat& a, const SymMat& b);

// Spectral decomposition with eigenvalues ordered as singular values:
// |eig[0]| <= ... <= |eig[n-1]|, ties broken by signed value ascending.
// rotation is orthogonal with det +1; recompose() returns P diag P^T.
struct Spectrum {
    int dim = 2;
    std::array<double, 3> eigvals{};
    std::array<double, 9> rotation{};  // row-major, columns are eigenvectors

    SymMat recompose() const;
};

// Closed-form 2x2 solve; 3x3 via the trigonometric method with one Newton
// polish per root and eigenvectors from the deflated 2x2 problem.
// Throws std::invalid_argument on non-finite entries.
Spectrum eigen_ordered(const SymMat& m);

// A singular symmetric matrix together with its determinant, kept as the
// membership certificate for the wave cone.
struct WaveConeSample {
    SymMat matrix;
    double certificate = 0.0;  // det(matrix)
};

// Samples P diag(0, d_2, ..., d_n) P^T with Haar-ish random orthogonal P
// and d_i uniform in [-1, 1]; deterministic given the seed.
std::vector<WaveConeSample> sample_wave_cone(int dim, std::uint64_t rng_seed,
                                             int count);

// Random orthogonal matrix (row-major, det +1) and random symmetric matrix
// with entries uniform in [-scale, scale]; both used throughout the tests.
std::array<double, 9> random_rotation(int dim, Rng& rng);
SymMat random_sym(int dim, Rng& rng, double scale = 1.0);
SymMat rotate(const SymMat& m, const std::array<double, 9>& p);  // P m P^T

}  // namespace vmass
