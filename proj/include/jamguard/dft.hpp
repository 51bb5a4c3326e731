#pragma once

#include <span>
#include <vector>

#include "jamguard/common.hpp"

namespace jamguard::dft {

bool is_pow2(std::size_t n) noexcept;
std::size_t next_pow2(std::size_t n) noexcept;

/// Unnormalized forward transform X[k] = sum_n x[n] e^{-j2pi nk/N}, in place.
/// Radix-2 for power-of-two sizes, direct summation otherwise.
void forward(std::span<cplx> x);

/// Unnormalized inverse transform x[n] = sum_k X[k] e^{+j2pi nk/N}, in place.
void inverse(std::span<cplx> x);

}  // namespace jamguard::dft
