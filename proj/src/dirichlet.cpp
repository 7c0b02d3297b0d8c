#include "rama/dirichlet.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "rama/common.hpp"
#include "rama/multivar_f.hpp"

namespace rama {

namespace {

void validate_dims(uint32_t k, uint32_t bound, const char* who) {
    if (k == 0 || k > kMaxTupleArity)
        throw std::invalid_argument(std::string(who) + ": dimension must be 1.." +
                                    std::to_string(kMaxTupleArity));
    if (bound == 0 || bound > 255)
        throw std::invalid_argument(std::string(who) + ": bound must be 1..255");
}

} // namespace

MultiSeries::MultiSeries(uint32_t k, uint32_t bound) : k_(k), bound_(bound) {
    validate_dims(k, bound, "MultiSeries");
}

MultiSeries MultiSeries::unit(uint32_t k, uint32_t bound) {
    MultiSeries s(k, bound);
    std::vector<uint32_t> ones(k, 1);
    s.set_coeff(ones, 1);
    return s;
}

uint64_t MultiSeries::pack(std::span<const uint32_t> tuple) const {
    if (tuple.size() != k_)
        throw std::invalid_argument("MultiSeries: tuple arity mismatch");
    uint64_t key = 0;
    for (uint32_t i = 0; i < k_; ++i) {
        if (tuple[i] < 1 || tuple[i] > bound_)
            throw std::out_of_range("MultiSeries: coordinate outside [1, bound]");
        key |= static_cast<uint64_t>(tuple[i]) << (8 * i);
    }
    return key;
}

void MultiSeries::unpack(uint64_t key, uint32_t* out) const {
    for (uint32_t i = 0; i < k_; ++i) out[i] = (key >> (8 * i)) & 0xffu;
}

int64_t MultiSeries::coeff(std::span<const uint32_t> tuple) const {
    auto it = coeffs_.find(pack(tuple));
    return it == coeffs_.end() ? 0 : it->second;
}

void MultiSeries::set_coeff(std::span<const uint32_t> tuple, int64_t value) {
    uint64_t key = pack(tuple);
    if (value == 0)
        coeffs_.erase(key);
    else
        coeffs_[key] = value;
}

void MultiSeries::add_coeff(std::span<const uint32_t> tuple, int64_t value) {
    uint64_t key = pack(tuple);
    int64_t next = coeffs_[key] + value;
    if (next == 0)
        coeffs_.erase(key);
    else
        coeffs_[key] = next;
}

bool MultiSeries::operator==(const MultiSeries& other) const {
    return k_ == other.k_ && bound_ == other.bound_ && coeffs_ == other.coeffs_;
}

MultiSeries dirichlet_convolve(const MultiSeries& a, const MultiSeries& b) {
    if (a.dim() != b.dim() || a.bound() != b.bound())
        throw std::invalid_argument("dirichlet_convolve: dimension or bound mismatch");
    uint32_t k = a.dim();
    uint32_t bound = a.bound();
    MultiSeries out(k, bound);
    std::vector<uint32_t> ta(k), tb(k), tn(k);
    std::unordered_map<uint64_t, i128> acc;
    for (const auto& [ka, va] : a.raw()) {
        a.unpack(ka, ta.data());
        for (const auto& [kb, vb] : b.raw()) {
            b.unpack(kb, tb.data());
            bool inside = true;
            for (uint32_t i = 0; i < k; ++i) {
                uint64_t prod = static_cast<uint64_t>(ta[i]) * tb[i];
                if (prod > bound) {
                    inside = false;
                    break;
                }
                tn[i] = static_cast<uint32_t>(prod);
            }
            if (!inside) continue;
            uint64_t key = 0;
            for (uint32_t i = 0; i < k; ++i) key |= static_cast<uint64_t>(tn[i]) << (8 * i);
            acc[key] += static_cast<i128>(va) * vb;
        }
    }
    std::vector<uint32_t> t(k);
    for (const auto& [key, value] : acc) {
        if (value == 0) continue;
        if (value > std::numeric_limits<int64_t>::max() ||
            value < std::numeric_limits<int64_t>::min())
            throw std::overflow_error("dirichlet_convolve: coefficient exceeds int64");
        out.unpack(key, t.data());
        out.set_coeff(t, static_cast<int64_t>(value));
    }
    return out;
}

MultiSeries zeta_factor_series(uint32_t subset_mask, bool invert, uint32_t k,
                               uint32_t bound, const SieveTables& tables) {
    validate_dims(k, bound, "zeta_factor_series");
    if (subset_mask == 0 || subset_mask >= (uint32_t{1} << k))
        throw std::invalid_argument("zeta_factor_series: subset must be a nonempty subset of [k]");
    if (tables.limit() < bound)
        throw std::out_of_range("zeta_factor_series: sieve limit below bound");
    uint32_t r = static_cast<uint32_t>(__builtin_popcount(subset_mask));
    MultiSeries out(k, bound);
    std::vector<uint32_t> tuple(k);
    for (uint32_t m = 1; m <= bound; ++m) {
        int64_t c = 1;
        for (uint32_t i = 0; i + 1 < r; ++i) c *= m; // m^{r-1}
        if (invert) {
            int mu = tables.mobius(m);
            if (mu == 0) continue;
            c *= mu;
        }
        for (uint32_t i = 0; i < k; ++i)
            tuple[i] = (subset_mask >> i) & 1u ? m : 1u;
        out.add_coeff(tuple, c);
    }
    return out;
}

MultiSeries f_series(uint32_t k, uint32_t bound, uint32_t beta,
                     const SieveTables& tables) {
    validate_dims(k, bound, "f_series");
    if (beta == 0) throw std::invalid_argument("f_series: beta must be positive");
    if (tables.limit() < bound)
        throw std::out_of_range("f_series: sieve limit below bound");
    u128 cells = 1;
    for (uint32_t i = 0; i < k; ++i) cells *= bound;
    if (cells > std::numeric_limits<uint64_t>::max())
        throw budget_error("f_series: enumeration count overflows");
    check_budget(static_cast<uint64_t>(cells), "f_series");

    MultiSeries out(k, bound);
    std::vector<uint32_t> tuple(k, 1);
    std::vector<uint64_t> wide(k, 1);
    while (true) {
        for (uint32_t i = 0; i < k; ++i) wide[i] = tuple[i];
        BigInt v = f_multiplicative(wide, beta, tables);
        if (v != 0) {
            if (!v.fits_slong_p())
                throw std::overflow_error("f_series: coefficient exceeds int64");
            out.set_coeff(tuple, static_cast<int64_t>(v.get_si()));
        }
        uint32_t pos = k;
        while (pos > 0) {
            --pos;
            if (tuple[pos] < bound) {
                ++tuple[pos];
                break;
            }
            if (pos == 0) {
                pos = UINT32_MAX;
                break;
            }
            tuple[pos] = 1;
        }
        if (pos == UINT32_MAX) break;
    }
    return out;
}

MultiSeries extract_E(uint32_t k, uint32_t bound, const SieveTables& tables) {
    MultiSeries e = f_series(k, bound, 1, tables);
    for (uint32_t mask = 0; mask < (uint32_t{1} << k); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        e = dirichlet_convolve(e, zeta_factor_series(mask, true, k, bound, tables));
    }
    return e;
}

LocalSeries::LocalSeries(uint32_t k, uint32_t max_degree) : k_(k), deg_(max_degree) {
    if (k == 0 || k > 4)
        throw std::invalid_argument("LocalSeries: dimension must be 1..4");
    if (max_degree == 0 || max_degree > 8)
        throw std::invalid_argument("LocalSeries: max_degree must be 1..8");
    size_t n = 1;
    for (uint32_t i = 0; i < k; ++i) n *= max_degree + 1;
    coeffs_.assign(n, BigRat(0));
}

LocalSeries LocalSeries::one(uint32_t k, uint32_t max_degree) {
    LocalSeries s(k, max_degree);
    s.coeffs_[0] = 1;
    return s;
}

namespace {

size_t local_index(std::span<const uint32_t> exps, uint32_t k, uint32_t deg) {
    if (exps.size() != k)
        throw std::invalid_argument("LocalSeries: exponent arity mismatch");
    size_t idx = 0;
    for (uint32_t i = 0; i < k; ++i) {
        if (exps[i] > deg)
            throw std::out_of_range("LocalSeries: exponent above max_degree");
        idx = idx * (deg + 1) + exps[i];
    }
    return idx;
}

} // namespace

const BigRat& LocalSeries::at(std::span<const uint32_t> exps) const {
    return coeffs_[local_index(exps, k_, deg_)];
}

BigRat& LocalSeries::at(std::span<const uint32_t> exps) {
    return coeffs_[local_index(exps, k_, deg_)];
}

void LocalSeries::index_to_exps(size_t idx, uint32_t* out) const {
    for (uint32_t i = k_; i-- > 0;) {
        out[i] = static_cast<uint32_t>(idx % (deg_ + 1));
        idx /= deg_ + 1;
    }
}

bool LocalSeries::operator==(const LocalSeries& other) const {
    return k_ == other.k_ && deg_ == other.deg_ && coeffs_ == other.coeffs_;
}

LocalSeries LocalSeries::operator+(const LocalSeries& other) const {
    if (k_ != other.k_ || deg_ != other.deg_)
        throw std::invalid_argument("LocalSeries: shape mismatch");
    LocalSeries out(k_, deg_);
    for (size_t i = 0; i < coeffs_.size(); ++i)
        out.coeffs_[i] = coeffs_[i] + other.coeffs_[i];
    return out;
}

LocalSeries LocalSeries::operator-(const LocalSeries& other) const {
    if (k_ != other.k_ || deg_ != other.deg_)
        throw std::invalid_argument("LocalSeries: shape mismatch");
    LocalSeries out(k_, deg_);
    for (size_t i = 0; i < coeffs_.size(); ++i)
        out.coeffs_[i] = coeffs_[i] - other.coeffs_[i];
    return out;
}

LocalSeries LocalSeries::operator*(const LocalSeries& other) const {
    if (k_ != other.k_ || deg_ != other.deg_)
        throw std::invalid_argument("LocalSeries: shape mismatch");
    LocalSeries out(k_, deg_);
    std::vector<uint32_t> ea(k_), eb(k_), en(k_);
    for (size_t ia = 0; ia < coeffs_.size(); ++ia) {
        if (coeffs_[ia] == 0) continue;
        index_to_exps(ia, ea.data());
        for (size_t ib = 0; ib < other.coeffs_.size(); ++ib) {
            if (other.coeffs_[ib] == 0) continue;
            other.index_to_exps(ib, eb.data());
            bool inside = true;
            for (uint32_t i = 0; i < k_; ++i) {
                en[i] = ea[i] + eb[i];
                if (en[i] > deg_) {
                    inside = false;
                    break;
                }
            }
            if (!inside) continue;
            out.at(en) += coeffs_[ia] * other.coeffs_[ib];
        }
    }
    return out;
}

LocalSeries LocalSeries::operator/(const LocalSeries& other) const {
    if (k_ != other.k_ || deg_ != other.deg_)
        throw std::invalid_argument("LocalSeries: shape mismatch");
    if (other.coeffs_[0] == 0)
        throw std::invalid_argument("LocalSeries: divisor constant term is zero");
    LocalSeries out(k_, deg_);
    std::vector<uint32_t> ev(k_), eu(k_), ew(k_);
    // Lexicographic index order dominates componentwise order, so every
    // quotient coefficient referenced below is already solved.
    for (size_t iv = 0; iv < coeffs_.size(); ++iv) {
        index_to_exps(iv, ev.data());
        BigRat s = coeffs_[iv];
        // enumerate nonzero u <= v componentwise
        std::fill(eu.begin(), eu.end(), 0u);
        while (true) {
            uint32_t pos = k_;
            while (pos > 0) {
                --pos;
                if (eu[pos] < ev[pos]) {
                    ++eu[pos];
                    break;
                }
                if (pos == 0) {
                    pos = UINT32_MAX;
                    break;
                }
                eu[pos] = 0;
            }
            if (pos == UINT32_MAX) break;
            const BigRat& bu = other.at(eu);
            if (bu == 0) continue;
            for (uint32_t i = 0; i < k_; ++i) ew[i] = ev[i] - eu[i];
            s -= bu * out.at(ew);
        }
        out.coeffs_[iv] = s / other.coeffs_[0];
    }
    return out;
}

namespace {

// 1 - c * T^exps as a polynomial; monomials past the cap truncate away.
LocalSeries one_minus_monomial(uint32_t k, uint32_t deg, const BigInt& c,
                               std::span<const uint32_t> exps) {
    LocalSeries s = LocalSeries::one(k, deg);
    bool inside = true;
    for (uint32_t i = 0; i < k; ++i)
        if (exps[i] > deg) inside = false;
    if (inside) s.at(exps) -= BigRat(c);
    return s;
}

BigInt pow_big(uint64_t base, uint64_t e) {
    BigInt out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base),
                  static_cast<unsigned long>(e));
    return out;
}

} // namespace

LocalSeries local_g_factor(uint64_t p, uint32_t k, uint32_t max_degree,
                           LocalFactorMethod method) {
    if (!is_prime_u64(p)) throw std::invalid_argument("local_g_factor: p must be prime");
    LocalSeries out(k, max_degree);
    if (method == LocalFactorMethod::enumerate) {
        std::vector<uint32_t> v(k);
        for (size_t idx = 0; idx < out.size(); ++idx) {
            out.index_to_exps(idx, v.data());
            uint64_t sum = 0, mx = 0;
            for (uint32_t e : v) {
                sum += e;
                mx = std::max<uint64_t>(mx, e);
            }
            out.flat(idx) = BigRat(pow_big(p, sum - mx));
        }
        return out;
    }

    // geometric: sum over n of p^{-n} (prod_i (1-(pT_i)^{n+1}) - prod_i (1-(pT_i)^n)),
    // all divided by prod_i (1 - pT_i). Terms with n > max_degree vanish in the
    // truncated algebra.
    uint32_t deg = max_degree;
    LocalSeries total(k, deg);
    std::vector<uint32_t> exps(k, 0);
    auto pT_pow_product = [&](uint32_t n) {
        LocalSeries prod = LocalSeries::one(k, deg);
        for (uint32_t i = 0; i < k; ++i) {
            std::fill(exps.begin(), exps.end(), 0u);
            exps[i] = n;
            prod = prod * one_minus_monomial(k, deg, pow_big(p, n), exps);
        }
        return prod;
    };
    for (uint32_t n = 0; n <= deg; ++n) {
        LocalSeries a = pT_pow_product(n + 1) - pT_pow_product(n);
        BigRat w(BigInt(1), pow_big(p, n));
        for (size_t idx = 0; idx < a.size(); ++idx)
            if (a.flat(idx) != 0) total.flat(idx) += a.flat(idx) * w;
    }
    return total / pT_pow_product(1);
}

RemarkReport verify_remark_local(uint64_t p, uint32_t k, uint32_t max_degree) {
    if (!is_prime_u64(p))
        throw std::invalid_argument("verify_remark_local: p must be prime");
    if (k < 2 || k > 4)
        throw std::invalid_argument("verify_remark_local: k must be 2..4");
    uint32_t deg = max_degree;
    LocalSeries lhs = local_g_factor(p, k, deg, LocalFactorMethod::enumerate);

    std::vector<uint32_t> exps(k);
    auto indicator = [&](uint32_t mask) {
        std::vector<uint32_t> e(k, 0);
        for (uint32_t i = 0; i < k; ++i)
            if (mask & (uint32_t{1} << i)) e[i] = 1;
        return e;
    };
    uint32_t full = (uint32_t{1} << k) - 1;

    // numerator: sum over nonempty I of (-1)^{|I|} (p^{|I|} T_I - 1)
    //            * prod over nonempty J != I of (1 - p^{|J|-1} T_J)
    LocalSeries num(k, deg);
    for (uint32_t mi = 1; mi <= full; ++mi) {
        uint32_t r = static_cast<uint32_t>(__builtin_popcount(mi));
        std::vector<uint32_t> ei = indicator(mi);
        LocalSeries term(k, deg);
        term.at(std::vector<uint32_t>(k, 0)) = -1;
        term.at(ei) += BigRat(pow_big(p, r));
        for (uint32_t mj = 1; mj <= full; ++mj) {
            if (mj == mi) continue;
            uint32_t rj = static_cast<uint32_t>(__builtin_popcount(mj));
            term = term * one_minus_monomial(k, deg, pow_big(p, rj - 1), indicator(mj));
        }
        if (r % 2 == 1)
            num = num - term;
        else
            num = num + term;
    }

    LocalSeries denom = LocalSeries::one(k, deg);
    for (uint32_t i = 0; i < k; ++i) {
        std::fill(exps.begin(), exps.end(), 0u);
        exps[i] = 1;
        denom = denom * one_minus_monomial(k, deg, BigInt(static_cast<unsigned long>(p)), exps);
    }
    LocalSeries e_local = num / denom;

    // product of the local zeta factors 1/(1 - p^{|I|-1} T_I) over nonempty I
    LocalSeries zprod = LocalSeries::one(k, deg);
    for (uint32_t mi = 1; mi <= full; ++mi) {
        uint32_t r = static_cast<uint32_t>(__builtin_popcount(mi));
        LocalSeries geo(k, deg);
        std::vector<uint32_t> ei = indicator(mi);
        std::vector<uint32_t> e(k);
        for (uint32_t m = 0; m <= deg; ++m) {
            for (uint32_t i = 0; i < k; ++i) e[i] = ei[i] * m;
            geo.at(e) = BigRat(pow_big(p, static_cast<uint64_t>(r - 1) * m));
        }
        zprod = zprod * geo;
    }

    LocalSeries rhs = zprod * e_local;
    RemarkReport rep;
    rep.p = p;
    rep.k = k;
    rep.max_degree = deg;
    rep.max_abs_discrepancy = 0;
    for (size_t idx = 0; idx < lhs.size(); ++idx) {
        BigRat d = lhs.flat(idx) - rhs.flat(idx);
        if (d < 0) d = -d;
        if (d > rep.max_abs_discrepancy) rep.max_abs_discrepancy = d;
    }
    rep.ok = rep.max_abs_discrepancy == 0;
    return rep;
}

} // namespace rama
