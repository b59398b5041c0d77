#pragma once

// Numerical kernels shared by the channel synthesizer and the experiment
// runner: Bessel J0, a Hermitian matrix square root, and a counter-based
// random stream with circularly-symmetric complex Gaussian sampling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fasris {

using cd = std::complex<double>;
using ComplexVector = std::vector<cd>;

/// Dense complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols, cd fill = cd{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    cd& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cd& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<cd> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const cd> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] ComplexVector column(std::size_t c) const {
        ComplexVector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    [[nodiscard]] std::span<const cd> data() const noexcept { return data_; }
    [[nodiscard]] std::span<cd> data() noexcept { return data_; }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(),
                           [](const cd& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }

    bool operator==(const ComplexMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cd> data_;
};

/// A * B^H.
inline ComplexMatrix multiply_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("multiply_adjoint: inner dimension mismatch");
    ComplexMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            cd acc{};
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * std::conj(b(j, k));
            out(i, j) = acc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bessel J0

namespace detail {

// Ascending series, summed in extended precision; the largest term near
// x = 16 is ~1.7e5 so cancellation stays far below 1e-12.
inline double j0_series(double x) {
    const long double q = -0.25L * static_cast<long double>(x) * static_cast<long double>(x);
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * static_cast<long double>(k));
        sum += term;
        if (std::fabs(term) < std::numeric_limits<long double>::epsilon() * std::fabs(sum) && k > 4) break;
    }
    return static_cast<double>(sum);
}

// Hankel asymptotic expansion J0(x) = sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),
// chi = x - pi/4, truncated at the smallest term.
inline double j0_asymptotic(double x) {
    const double z8 = 8.0 * x;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;  // |a_k| / (8x)^k
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (odd * odd) / (static_cast<double>(k) * z8);
        if (std::fabs(term) >= last) break;
        last = std::fabs(term);
        // k odd -> Q series, k even -> P series; signs alternate within each.
        if (k % 2 == 1) {
            q += ((k / 2) % 2 == 0 ? -1.0 : 1.0) * term;
        } else {
            p += ((k / 2) % 2 == 1 ? -1.0 : 1.0) * term;
        }
    }
    const double chi = x - std::numbers::pi / 4.0;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// Series/asymptotic switch point. Both branches agree to better than 1e-13
/// here.
inline constexpr double kJ0AsymptoticCutoff = 16.0;

/// Bessel function of the first kind, order zero. Absolute error below 1e-10
/// for |x| <= 50. Throws std::domain_error on non-finite input.
inline double bessel_j0(double x) {
    if (!std::isfinite(x)) throw std::domain_error("bessel_j0: non-finite argument");
    x = std::fabs(x);
    return x <= kJ0AsymptoticCutoff ? detail::j0_series(x) : detail::j0_asymptotic(x);
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition and square root

struct SymmetricEigen {
    std::vector<double> values;
    std::vector<double> vectors;  // column-major n x n, column k pairs with values[k]
    std::size_t n = 0;
};

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix given
/// row-major in `a` (consumed).
inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

    double total = 0.0;
    for (double x : a) total += x * x;
    const double stop = total * 1e-32;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off <= stop || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[p * n + k];
                    const double vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen out;
    out.n = n;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = at(i, i);
    out.vectors = std::move(v);
    return out;
}

/// Eigenvalues of a Hermitian matrix (each appears once, ascending).
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& r) {
    const std::size_t n = r.rows();
    const std::size_t m = 2 * n;
    std::vector<double> e(m * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const cd z = r(i, j);
            e[i * m + j] = z.real();
            e[(i + n) * m + (j + n)] = z.real();
            e[i * m + (j + n)] = -z.imag();
            e[(i + n) * m + j] = z.imag();
        }
    }
    auto eig = jacobi_eigen(std::move(e), m);
    std::sort(eig.values.begin(), eig.values.end());
    std::vector<double> out(n);
    // The real embedding duplicates every eigenvalue.
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (eig.values[2 * i] + eig.values[2 * i + 1]);
    return out;
}

/// Principal square root S of a Hermitian PSD matrix, so that S S^H = R.
///
/// Works on the real 2n x 2n embedding [[Re, -Im], [Im, Re]], whose matrix
/// functions preserve the embedding structure. Eigenvalues in
/// [-tol * lambda_max, 0) are clamped to zero; anything more negative is
/// rejected as not positive semidefinite. `relative_tolerance` also bounds
/// the allowed Hermitian asymmetry relative to the largest entry.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& r, double relative_tolerance = 1e-9) {
    if (!r.square()) throw std::invalid_argument("hermitian_sqrt: matrix is not square");
    const std::size_t n = r.rows();
    if (n == 0) return {};
    double scale = 0.0;
    for (const cd& z : r.data()) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            if (std::abs(r(i, j) - std::conj(r(j, i))) > relative_tolerance * std::max(scale, 1.0))
                throw std::invalid_argument("hermitian_sqrt: matrix is not Hermitian");

    // Real symmetric input needs no embedding.
    bool real_input = true;
    for (const cd& z : r.data()) real_input = real_input && z.imag() == 0.0;
    const std::size_t m = real_input ? n : 2 * n;
    std::vector<double> e(m * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // Symmetrize so that tolerated asymmetry does not bias the result.
            const cd z = 0.5 * (r(i, j) + std::conj(r(j, i)));
            e[i * m + j] = z.real();
            if (real_input) continue;
            e[(i + n) * m + (j + n)] = z.real();
            e[i * m + (j + n)] = -z.imag();
            e[(i + n) * m + j] = z.imag();
        }
    }
    const auto eig = jacobi_eigen(std::move(e), m);
    const double lambda_max = *std::max_element(eig.values.begin(), eig.values.end());
    const double floor = -relative_tolerance * std::max(lambda_max, 0.0);
    std::vector<double> root(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = eig.values[k];
        if (lam < floor)
            throw std::invalid_argument("hermitian_sqrt: matrix is not positive semidefinite (eigenvalue " +
                                        std::to_string(lam) + ")");
        root[k] = lam > 0.0 ? std::sqrt(lam) : 0.0;
    }

    ComplexMatrix s(n, n);
    if (real_input) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double re = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double* vk = &eig.vectors[k * m];
                    re += vk[i] * (root[k] * vk[j]);
                }
                s(i, j) = re;
            }
        }
        return s;
    }
    // Each eigenvalue of the embedding is doubled, and near zero the two
    // copies can land on opposite sides of the clamp. Projecting the root
    // onto the [[A, -B], [B, A]] structure averages the pair.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double a11 = 0.0, a22 = 0.0, b21 = 0.0, b12 = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double* vk = &eig.vectors[k * m];
                const double wj = root[k] * vk[j];
                const double wjn = root[k] * vk[j + n];
                a11 += vk[i] * wj;
                a22 += vk[i + n] * wjn;
                b21 += vk[i + n] * wj;
                b12 += vk[i] * wjn;
            }
            s(i, j) = {0.5 * (a11 + a22), 0.5 * (b21 - b12)};
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Random streams

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Counter-based random stream for one Monte-Carlo trial.
///
/// key    = mix64(mix64(master_seed) ^ mix64(stream_index + golden))
/// draw_i = mix64(key + (i + 1) * golden),  i = 0, 1, 2, ...
///
/// where golden = 0x9e3779b97f4a7c15 and mix64 is the SplitMix64
/// finalizer. The i-th output depends only on (master_seed, stream_index, i),
/// so a trial's randomness never depends on which thread runs it or in which
/// order. Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : master_seed_(master_seed),
          stream_index_(stream_index),
          key_(mix64(mix64(master_seed) ^ mix64(stream_index + kGolden))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return {master_seed, trial_index};
}

/// Fills `out` with i.i.d. CN(0, 1) samples (real and imaginary variance 1/2).
inline void fill_complex_gaussian(RngStream& stream, std::span<cd> out) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (cd& z : out) {
        const double re = normal(stream);
        const double im = normal(stream);
        z = {re, im};
    }
}

inline ComplexVector complex_gaussian_vector(RngStream& stream, std::size_t n) {
    if (n == 0) throw std::invalid_argument("complex_gaussian_vector: n must be >= 1");
    ComplexVector out(n);
    fill_complex_gaussian(stream, out);
    return out;
}

// ---------------------------------------------------------------------------
// Small helpers

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Neumaier compensated sum, evaluated in index order.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace fasris
