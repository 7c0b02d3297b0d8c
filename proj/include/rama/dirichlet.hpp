#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rama/arith.hpp"
#include "rama/bigint.hpp"

namespace rama {

// Truncated multivariate Dirichlet series: integer coefficients a(n_1..n_k)
// stored sparsely for tuples with every coordinate in [1, bound]. Keys pack
// coordinates into 8-bit fields, so bound <= 255 and k <= 8.
class MultiSeries {
public:
    MultiSeries(uint32_t k, uint32_t bound);

    static MultiSeries unit(uint32_t k, uint32_t bound);

    uint32_t dim() const { return k_; }
    uint32_t bound() const { return bound_; }

    int64_t coeff(std::span<const uint32_t> tuple) const;
    void set_coeff(std::span<const uint32_t> tuple, int64_t value);
    void add_coeff(std::span<const uint32_t> tuple, int64_t value);

    const std::unordered_map<uint64_t, int64_t>& raw() const { return coeffs_; }

    uint64_t pack(std::span<const uint32_t> tuple) const;
    void unpack(uint64_t key, uint32_t* out) const;

    bool operator==(const MultiSeries& other) const;

private:
    uint32_t k_;
    uint32_t bound_;
    std::unordered_map<uint64_t, int64_t> coeffs_;
};

// Componentwise Dirichlet convolution, truncated to the common bound.
MultiSeries dirichlet_convolve(const MultiSeries& a, const MultiSeries& b);

// Series of zeta(s_I - |I| + 1) viewed in the k-variable algebra: coefficient
// m^{|I|-1} at the tuple with m in the coordinates of subset_mask and 1
// elsewhere. With invert=true, the coefficient is mu(m) * m^{|I|-1}, the
// Dirichlet inverse. subset_mask must be a nonempty subset of the k
// coordinates; singletons give the plain zeta(s_i) series.
MultiSeries zeta_factor_series(uint32_t subset_mask, bool invert, uint32_t k,
                               uint32_t bound, const SieveTables& tables);

// Coefficients of F(s): a(n) = f(n_1..n_k) over the truncated box.
MultiSeries f_series(uint32_t k, uint32_t bound, uint32_t beta,
                     const SieveTables& tables);

// E = F * prod over |I| >= 2 of the inverted zeta factors, masks ascending.
MultiSeries extract_E(uint32_t k, uint32_t bound, const SieveTables& tables);

// Dense exact-rational power series in T_1..T_k at one prime, truncated to
// total degree max_degree in each variable.
class LocalSeries {
public:
    LocalSeries(uint32_t k, uint32_t max_degree);

    uint32_t dim() const { return k_; }
    uint32_t max_degree() const { return deg_; }

    const BigRat& at(std::span<const uint32_t> exps) const;
    BigRat& at(std::span<const uint32_t> exps);

    static LocalSeries one(uint32_t k, uint32_t max_degree);

    size_t size() const { return coeffs_.size(); }
    const BigRat& flat(size_t idx) const { return coeffs_[idx]; }
    BigRat& flat(size_t idx) { return coeffs_[idx]; }
    void index_to_exps(size_t idx, uint32_t* out) const;

    bool operator==(const LocalSeries& other) const;

    LocalSeries operator+(const LocalSeries& other) const;
    LocalSeries operator-(const LocalSeries& other) const;
    LocalSeries operator*(const LocalSeries& other) const;
    // Division; other must have a nonzero constant term.
    LocalSeries operator/(const LocalSeries& other) const;

private:
    uint32_t k_;
    uint32_t deg_;
    std::vector<BigRat> coeffs_; // dense, (deg+1)^k entries, lexicographic
};

enum class LocalFactorMethod { enumerate, geometric };

// Local factor of the k-variable g series at prime p: coefficient of T^v is
// p^{sum(v) - max(v)}. `enumerate` fills coefficients directly; `geometric`
// builds the same series from telescoped geometric products divided by
// prod(1 - p T_i). Both are exact and must agree.
LocalSeries local_g_factor(uint64_t p, uint32_t k, uint32_t max_degree,
                           LocalFactorMethod method);

struct RemarkReport {
    uint64_t p = 0;
    uint32_t k = 0;
    uint32_t max_degree = 0;
    bool ok = false;
    BigRat max_abs_discrepancy; // 0 when ok
};

// Verifies at prime p that the local g factor equals
//   prod over nonempty I of geometric zeta-like factors  times  E_local,
// where E_local = N / prod_i(1 - p T_i) with
//   N = sum over nonempty I of (-1)^{|I|} (p^{|I|} T_I - 1)
//       * prod over other nonempty J of (1 - p^{|J|-1} T_J).
// Exact rational arithmetic throughout.
RemarkReport verify_remark_local(uint64_t p, uint32_t k, uint32_t max_degree);

} // namespace rama
