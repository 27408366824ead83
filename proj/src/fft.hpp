#pragma once

#include <span>

#include "formcalc/form_field.hpp"

namespace formcalc::detail {

/// Unitary N-dimensional DFT of one component (n^N samples, row-major).
/// forward uses exp(-i k.x), inverse exp(+i k.x); both scale by n^{-N/2}.
void fft_component(const GridSpec& grid, std::span<const Complex> in, std::span<Complex> out, bool forward);

}  // namespace formcalc::detail
