#pragma once

// Receiver side information u = (S (x) I_ell) w and the subcode it leaves:
// every consistent message is v + A_S w~, so the decoder only searches the
// p^{(K-M) ell} cosets generated by G A_S.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sidelattice/construction_a.hpp"
#include "sidelattice/errors.hpp"
#include "sidelattice/fp_linalg.hpp"

namespace sidelattice {

/// Side-information matrix in reduced row-echelon form with M = rank < K rows.
class SideInfoMatrix {
public:
    const FpMatrix& matrix() const noexcept { return s_; }
    std::size_t rank() const noexcept { return s_.rows(); }
    std::size_t message_count() const noexcept { return s_.cols(); }

    friend bool operator==(const SideInfoMatrix&, const SideInfoMatrix&) = default;

private:
    explicit SideInfoMatrix(FpMatrix s) : s_(std::move(s)) {}
    friend SideInfoMatrix canonicalize(const FpMatrix& raw);

    FpMatrix s_;
};

/// Row-reduces `raw` and drops redundant rows. Throws FullRankSideInfo when
/// the rows span all of F_p^K.
inline SideInfoMatrix canonicalize(const FpMatrix& raw) {
    if (raw.cols() == 0) throw DimensionMismatch("side-information matrix needs K >= 1 columns");
    auto [reduced, pivots] = rref(raw);
    if (pivots.size() == raw.cols()) {
        throw FullRankSideInfo("side information has full rank " + std::to_string(raw.cols()) +
                               "; the receiver already knows every message");
    }
    FpMatrix s(raw.field(), pivots.size(), raw.cols());
    for (std::size_t i = 0; i < pivots.size(); ++i)
        for (std::size_t j = 0; j < raw.cols(); ++j) s.set(i, j, reduced(i, j));
    return SideInfoMatrix(std::move(s));
}

struct ExpurgationData {
    FpMatrix null_basis;     // A_S, K*ell x (K-M)*ell
    FpMatrix coset_leader;   // v, K*ell x 1
    FpMatrix sub_generator;  // G A_S, n x (K-M)*ell
};

/// Side-information realization seen by a receiver holding S when w is sent.
inline FpMatrix side_info_realization(const SideInfoMatrix& s, const FpMatrix& w, std::size_t ell) {
    return kron_with_identity(s.matrix(), ell) * w;
}

inline ExpurgationData expurgate(const SideInfoMatrix& s, const FpMatrix& u, const FpMatrix& generator,
                                 std::size_t ell) {
    const FpMatrix system = kron_with_identity(s.matrix(), ell);
    if (generator.cols() != system.cols()) {
        throw DimensionMismatch("generator has " + std::to_string(generator.cols()) + " columns, expected K*ell = " +
                                std::to_string(system.cols()));
    }
    FpMatrix leader(s.matrix().field(), system.cols(), 1);
    try {
        leader = particular_solution(system, u);
    } catch (const InconsistentSystem&) {
        throw InconsistentSideInfo("side-information realization is inconsistent with S");
    }
    FpMatrix basis = null_space_basis(system);
    FpMatrix sub = generator * basis;
    if (rank(sub) < basis.cols()) {
        throw DegenerateSubcode("rank(G A_S) = " + std::to_string(rank(sub)) + " < " + std::to_string(basis.cols()));
    }
    return {std::move(basis), std::move(leader), std::move(sub)};
}

/// w = v + A_S w~.
inline FpMatrix recover_message(const ExpurgationData& exp, const FpMatrix& reduced_message) {
    return exp.coset_leader + exp.null_basis * reduced_message;
}

/// Number of subspaces of F_p^K of dimension 0..K-1 (sum of Gaussian binomials).
inline std::uint64_t proper_subspace_count(std::uint64_t p, std::size_t K) {
    std::uint64_t total = 0;
    for (std::size_t m = 0; m < K; ++m) {
        // [K choose m]_p = prod_{i<m} (p^{K-i} - 1) / (p^{i+1} - 1)
        std::uint64_t num = 1, den = 1;
        for (std::size_t i = 0; i < m; ++i) {
            std::uint64_t a = 1, b = 1;
            for (std::size_t e = 0; e < K - i; ++e) a *= p;
            for (std::size_t e = 0; e < i + 1; ++e) b *= p;
            num *= a - 1;
            den *= b - 1;
        }
        total += num / den;
    }
    return total;
}

/// One canonical matrix per proper subspace of F_p^K, ordered by dimension
/// and then by pivot pattern and free entries (lexicographic).
inline std::vector<SideInfoMatrix> enumerate_subspaces(const PrimeField& field, std::size_t K,
                                                       std::size_t cap = 10'000) {
    if (K == 0) throw DimensionMismatch("K must be at least 1");
    if (K > 8 || proper_subspace_count(field.modulus(), K) > cap) {
        throw EnumerationTooLarge("too many subspaces of F_" + std::to_string(field.modulus()) + "^" +
                                  std::to_string(K) + " for cap " + std::to_string(cap));
    }
    std::vector<SideInfoMatrix> out;
    out.push_back(canonicalize(FpMatrix(field, 0, K)));
    for (std::size_t m = 1; m < K; ++m) {
        // Pivot sets as increasing index vectors.
        std::vector<std::size_t> piv(m);
        for (std::size_t i = 0; i < m; ++i) piv[i] = i;
        while (true) {
            std::vector<bool> is_pivot(K, false);
            for (auto c : piv) is_pivot[c] = true;
            std::vector<std::pair<std::size_t, std::size_t>> free_slots;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = piv[i] + 1; j < K; ++j)
                    if (!is_pivot[j]) free_slots.emplace_back(i, j);
            const std::uint64_t fills = checked_power(field.modulus(), free_slots.size(), cap);
            for (std::uint64_t idx = 0; idx < fills; ++idx) {
                FpMatrix s(field, m, K);
                for (std::size_t i = 0; i < m; ++i) s.set(i, piv[i], 1);
                const FpMatrix vals = index_to_vector(field, idx, free_slots.size());
                for (std::size_t f = 0; f < free_slots.size(); ++f) s.set(free_slots[f].first, free_slots[f].second, vals(f, 0));
                out.push_back(canonicalize(s));
            }
            std::size_t i = m;
            while (i-- > 0 && piv[i] == K - m + i) {}
            if (i == static_cast<std::size_t>(-1)) break;
            ++piv[i];
            for (std::size_t j = i + 1; j < m; ++j) piv[j] = piv[j - 1] + 1;
        }
    }
    return out;
}

}  // namespace sidelattice
