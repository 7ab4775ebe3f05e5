#pragma once

// Exact arithmetic and dense linear algebra over prime fields F_p.
//
// Residues are kept canonical in [0, p) and every operation reduces eagerly,
// so the per-entry invariant can be checked at any point. p < 2^31 keeps all
// products inside 64-bit integers.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sidelattice/errors.hpp"

namespace sidelattice {

using Residue = std::uint32_t;

/// Deterministic primality test by trial division (inputs are below 2^31).
constexpr bool is_prime(std::uint64_t v) noexcept {
    if (v < 2) return false;
    if (v < 4) return true;
    if (v % 2 == 0 || v % 3 == 0) return false;
    for (std::uint64_t d = 5; d * d <= v; d += 6) {
        if (v % d == 0 || v % (d + 2) == 0) return false;
    }
    return true;
}

/// Smallest prime >= v.
constexpr std::uint64_t next_prime(std::uint64_t v) noexcept {
    if (v <= 2) return 2;
    while (!is_prime(v)) ++v;
    return v;
}

class PrimeField {
public:
    static constexpr std::uint64_t max_modulus = (std::uint64_t{1} << 31);

    explicit PrimeField(std::uint64_t p) : p_(static_cast<Residue>(p)) {
        if (p >= max_modulus) throw Error("prime modulus must be below 2^31, got " + std::to_string(p));
        if (!is_prime(p)) throw Error(std::to_string(p) + " is not prime");
    }

    Residue modulus() const noexcept { return p_; }

    Residue reduce(std::int64_t v) const noexcept {
        const auto p = static_cast<std::int64_t>(p_);
        auto r = v % p;
        return static_cast<Residue>(r < 0 ? r + p : r);
    }

    Residue add(Residue a, Residue b) const noexcept {
        std::uint64_t s = std::uint64_t{a} + b;
        return static_cast<Residue>(s >= p_ ? s - p_ : s);
    }
    Residue sub(Residue a, Residue b) const noexcept { return a >= b ? a - b : static_cast<Residue>(a + p_ - b); }
    Residue neg(Residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
    Residue mul(Residue a, Residue b) const noexcept {
        return static_cast<Residue>((std::uint64_t{a} * b) % p_);
    }

    Residue pow(Residue base, std::uint64_t e) const noexcept {
        Residue acc = 1 % p_;
        while (e) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }

    /// Multiplicative inverse; a must be nonzero.
    Residue inv(Residue a) const {
        if (a % p_ == 0) throw Error("inverse of zero in F_" + std::to_string(p_));
        return pow(a, p_ - 2);
    }

    friend bool operator==(const PrimeField&, const PrimeField&) = default;

private:
    Residue p_;
};

/// Dense row-major matrix over F_p. Vectors are single-column matrices.
class FpMatrix {
public:
    FpMatrix(PrimeField field, std::size_t rows, std::size_t cols)
        : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    /// Entries may be any integers; they are reduced into [0, p).
    FpMatrix(PrimeField field, std::initializer_list<std::initializer_list<std::int64_t>> rows)
        : field_(field), rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
            for (auto v : r) data_.push_back(field_.reduce(v));
        }
    }

    static FpMatrix from_rows(PrimeField field, const std::vector<std::vector<std::int64_t>>& rows,
                              std::size_t cols) {
        FpMatrix m(field, rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw DimensionMismatch("row " + std::to_string(i) + " has wrong length");
            for (std::size_t j = 0; j < cols; ++j) m.set(i, j, field.reduce(rows[i][j]));
        }
        return m;
    }

    static FpMatrix column(PrimeField field, const std::vector<std::int64_t>& entries) {
        FpMatrix m(field, entries.size(), 1);
        for (std::size_t i = 0; i < entries.size(); ++i) m.set(i, 0, field.reduce(entries[i]));
        return m;
    }

    static FpMatrix identity(PrimeField field, std::size_t n) {
        FpMatrix m(field, n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
        return m;
    }

    const PrimeField& field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<Residue>& entries() const noexcept { return data_; }

    Residue operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, Residue v) noexcept { data_[r * cols_ + c] = v % field_.modulus(); }

    bool is_zero() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](Residue v) { return v == 0; });
    }

    FpMatrix transpose() const {
        FpMatrix t(field_, cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t.data_[j * rows_ + i] = (*this)(i, j);
        return t;
    }

    /// Column j as a single-column matrix.
    FpMatrix col(std::size_t j) const {
        FpMatrix c(field_, rows_, 1);
        for (std::size_t i = 0; i < rows_; ++i) c.data_[i] = (*this)(i, j);
        return c;
    }

    friend FpMatrix operator*(const FpMatrix& a, const FpMatrix& b) {
        a.require_same_field(b);
        if (a.cols_ != b.rows_) {
            throw DimensionMismatch("matrix product " + a.shape() + " * " + b.shape());
        }
        const auto p = std::uint64_t{a.field_.modulus()};
        FpMatrix out(a.field_, a.rows_, b.cols_);
        std::vector<std::uint64_t> acc(b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            std::fill(acc.begin(), acc.end(), 0);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const std::uint64_t aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) acc[j] = (acc[j] + aik * b(k, j)) % p;
            }
            for (std::size_t j = 0; j < b.cols_; ++j) out.data_[i * b.cols_ + j] = static_cast<Residue>(acc[j]);
        }
        return out;
    }

    friend FpMatrix operator+(const FpMatrix& a, const FpMatrix& b) {
        a.require_same_shape(b, "+");
        FpMatrix out(a.field_, a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.data_.size(); ++i) out.data_[i] = a.field_.add(a.data_[i], b.data_[i]);
        return out;
    }

    friend FpMatrix operator-(const FpMatrix& a, const FpMatrix& b) {
        a.require_same_shape(b, "-");
        FpMatrix out(a.field_, a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.data_.size(); ++i) out.data_[i] = a.field_.sub(a.data_[i], b.data_[i]);
        return out;
    }

    /// Block-stack [a; b] (same column count).
    static FpMatrix vstack(const FpMatrix& a, const FpMatrix& b) {
        a.require_same_field(b);
        if (a.cols_ != b.cols_) throw DimensionMismatch("vstack " + a.shape() + " / " + b.shape());
        FpMatrix out(a.field_, a.rows_ + b.rows_, a.cols_);
        std::copy(a.data_.begin(), a.data_.end(), out.data_.begin());
        std::copy(b.data_.begin(), b.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(a.data_.size()));
        return out;
    }

    /// Block-concatenate [a | b] (same row count).
    static FpMatrix hstack(const FpMatrix& a, const FpMatrix& b) {
        a.require_same_field(b);
        if (a.rows_ != b.rows_) throw DimensionMismatch("hstack " + a.shape() + " | " + b.shape());
        FpMatrix out(a.field_, a.rows_, a.cols_ + b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t j = 0; j < a.cols_; ++j) out.set(i, j, a(i, j));
            for (std::size_t j = 0; j < b.cols_; ++j) out.set(i, a.cols_ + j, b(i, j));
        }
        return out;
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    friend bool operator==(const FpMatrix& a, const FpMatrix& b) {
        return a.field_ == b.field_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend std::ostream& operator<<(std::ostream& os, const FpMatrix& m) {
        os << '[';
        for (std::size_t i = 0; i < m.rows_; ++i) {
            os << (i ? ", [" : "[");
            for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? "," : "") << m(i, j);
            os << ']';
        }
        return os << "] mod " << m.field_.modulus();
    }

private:
    void require_same_field(const FpMatrix& o) const {
        if (!(field_ == o.field_)) throw DimensionMismatch("operands live in different fields");
    }
    void require_same_shape(const FpMatrix& o, const char* op) const {
        require_same_field(o);
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch(std::string("operator") + op + " " + shape() + " vs " + o.shape());
    }

    PrimeField field_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Residue> data_;
};

struct RrefResult {
    FpMatrix reduced;
    std::vector<std::size_t> pivots;  // pivot column of each nonzero row, increasing
};

/// Reduced row-echelon form by Gauss-Jordan elimination.
inline RrefResult rref(FpMatrix m) {
    const auto& f = m.field();
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t sel = row;
        while (sel < m.rows() && m(sel, col) == 0) ++sel;
        if (sel == m.rows()) continue;
        if (sel != row) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                Residue tmp = m(row, j);
                m.set(row, j, m(sel, j));
                m.set(sel, j, tmp);
            }
        }
        const Residue scale = f.inv(m(row, col));
        for (std::size_t j = col; j < m.cols(); ++j) m.set(row, j, f.mul(m(row, j), scale));
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == row) continue;
            const Residue factor = m(i, col);
            if (factor == 0) continue;
            for (std::size_t j = col; j < m.cols(); ++j) m.set(i, j, f.sub(m(i, j), f.mul(factor, m(row, j))));
        }
        pivots.push_back(col);
        ++row;
    }
    return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const FpMatrix& m) { return rref(m).pivots.size(); }

/// Columns form a basis of {x : m x = 0}; one column per free variable, in
/// increasing order of the free column index.
inline FpMatrix null_space_basis(const FpMatrix& m) {
    const auto& f = m.field();
    const auto [r, pivots] = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : pivots) is_pivot[c] = true;

    FpMatrix basis(f, m.cols(), m.cols() - pivots.size());
    std::size_t out = 0;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        basis.set(free, out, 1);
        for (std::size_t i = 0; i < pivots.size(); ++i) basis.set(pivots[i], out, f.neg(r(i, free)));
        ++out;
    }
    return basis;
}

/// One solution of m v = u with every free variable set to zero.
inline FpMatrix particular_solution(const FpMatrix& m, const FpMatrix& u) {
    if (u.cols() != 1 || u.rows() != m.rows()) {
        throw DimensionMismatch("right-hand side " + u.shape() + " does not fit system " + m.shape());
    }
    const auto [r, pivots] = rref(FpMatrix::hstack(m, u));
    if (!pivots.empty() && pivots.back() == m.cols()) throw InconsistentSystem("system has no solution");
    FpMatrix v(m.field(), m.cols(), 1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v.set(pivots[i], 0, r(i, m.cols()));
    return v;
}

/// s (x) I_ell: block (a, b) equals s(a, b) * I_ell.
inline FpMatrix kron_with_identity(const FpMatrix& s, std::size_t ell) {
    if (ell == 0) throw DimensionMismatch("kron_with_identity needs ell >= 1");
    FpMatrix out(s.field(), s.rows() * ell, s.cols() * ell);
    for (std::size_t a = 0; a < s.rows(); ++a)
        for (std::size_t b = 0; b < s.cols(); ++b)
            for (std::size_t i = 0; i < ell; ++i) out.set(a * ell + i, b * ell + i, s(a, b));
    return out;
}

/// Entries i.i.d. uniform on [0, p), consumed row-major from `gen`.
template <class URBG>
FpMatrix random_matrix(const PrimeField& field, std::size_t rows, std::size_t cols, URBG& gen) {
    std::uniform_int_distribution<Residue> dist(0, field.modulus() - 1);
    FpMatrix m(field, rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m.set(i, j, dist(gen));
    return m;
}

}  // namespace sidelattice
