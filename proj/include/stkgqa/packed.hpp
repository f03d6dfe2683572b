#pragma once

#include <cstddef>

// Elementwise complex arithmetic on packed rows [re(0..d-1), im(0..d-1)].
// The *_accum gradient helpers implement the complex-product chain rule in
// pair calculus: for z = a*b, grad_a = upstream ⊙ conj(b).

namespace stkgqa::packed {

inline void cmul(const double* a, const double* b, double* out, size_t d) {
    const double *ar = a, *ai = a + d, *br = b, *bi = b + d;
    double *outr = out, *outi = out + d;
    for (size_t k = 0; k < d; ++k) {
        outr[k] = ar[k] * br[k] - ai[k] * bi[k];
        outi[k] = ar[k] * bi[k] + ai[k] * br[k];
    }
}

// out += u ⊙ b
inline void cmul_accum(const double* u, const double* b, double* out, size_t d) {
    const double *ur = u, *ui = u + d, *br = b, *bi = b + d;
    double *outr = out, *outi = out + d;
    for (size_t k = 0; k < d; ++k) {
        outr[k] += ur[k] * br[k] - ui[k] * bi[k];
        outi[k] += ur[k] * bi[k] + ui[k] * br[k];
    }
}

// out += u ⊙ conj(b)
inline void cmul_conj_accum(const double* u, const double* b, double* out, size_t d) {
    const double *ur = u, *ui = u + d, *br = b, *bi = b + d;
    double *outr = out, *outi = out + d;
    for (size_t k = 0; k < d; ++k) {
        outr[k] += ur[k] * br[k] + ui[k] * bi[k];
        outi[k] += ui[k] * br[k] - ur[k] * bi[k];
    }
}

}  // namespace stkgqa::packed
