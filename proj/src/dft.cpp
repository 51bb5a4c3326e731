#include "jamguard/dft.hpp"

#include <cmath>
#include <utility>

namespace jamguard::dft {

bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace {

void radix2(std::span<cplx> a, bool inv) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inv ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly per index to avoid drift from repeated products.
        std::vector<cplx> w(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double ang = sign * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(len);
            w[k] = {std::cos(ang), std::sin(ang)};
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * w[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

void direct(std::span<cplx> a, bool inv) {
    const std::size_t n = a.size();
    std::vector<cplx> out(n);
    const double sign = inv ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = (i * k) % n;
            const double ang = sign * 2.0 * kPi * static_cast<double>(idx) / static_cast<double>(n);
            acc += a[i] * cplx{std::cos(ang), std::sin(ang)};
        }
        out[k] = acc;
    }
    std::copy(out.begin(), out.end(), a.begin());
}

}  // namespace

void forward(std::span<cplx> x) {
    if (x.size() <= 1) return;
    is_pow2(x.size()) ? radix2(x, false) : direct(x, false);
}

void inverse(std::span<cplx> x) {
    if (x.size() <= 1) return;
    is_pow2(x.size()) ? radix2(x, true) : direct(x, true);
}

}  // namespace jamguard::dft
