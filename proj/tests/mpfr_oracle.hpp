#pragma once
// High-precision Mittag-Leffler series for tests. Precision is sized from the
// largest term so the alternating sum keeps ~40 correct digits.

#include <mpfr.h>

#include <algorithm>
#include <cmath>

namespace oracle_mp {

inline bool nonpos_int(double x) { return x <= 0.0 && x == std::floor(x); }

inline double mlf_mp(double alpha, double beta, double z) {
  if (z == 0.0) {
    if (nonpos_int(beta)) return 0.0;
    return 1.0 / std::tgamma(beta);
  }
  // log10 of the largest term, estimated in double
  double lz = std::log10(std::abs(z)), peak = 0.0;
  int n_end = 0;
  for (int n = 0; n < 200000; ++n) {
    double arg = n * alpha + beta;
    double lt = n * lz - (arg > 0 ? std::lgamma(arg) / std::log(10.0) : 0.0);
    peak = std::max(peak, lt);
    if (arg > 2.0 && lt < peak - 60.0 && lt < -60.0) {
      n_end = n;
      break;
    }
  }
  mpfr_prec_t bits = static_cast<mpfr_prec_t>((peak + 60.0) * 3.33) + 64;
  mpfr_t sum, term, zz, g, arg;
  mpfr_inits2(bits, sum, term, zz, g, arg, (mpfr_ptr)nullptr);
  mpfr_set_d(zz, z, MPFR_RNDN);
  mpfr_set_ui(sum, 0, MPFR_RNDN);
  mpfr_t zn;
  mpfr_init2(zn, bits);
  mpfr_set_ui(zn, 1, MPFR_RNDN);
  mpfr_t a, b;
  mpfr_inits2(bits, a, b, (mpfr_ptr)nullptr);
  mpfr_set_d(a, alpha, MPFR_RNDN);
  mpfr_set_d(b, beta, MPFR_RNDN);
  for (int n = 0; n <= n_end; ++n) {
    mpfr_mul_ui(arg, a, n, MPFR_RNDN);
    mpfr_add(arg, arg, b, MPFR_RNDN);
    bool pole = mpfr_cmp_ui(arg, 0) <= 0 && mpfr_integer_p(arg);
    if (!pole) {
      mpfr_gamma(g, arg, MPFR_RNDN);
      mpfr_div(term, zn, g, MPFR_RNDN);
      mpfr_add(sum, sum, term, MPFR_RNDN);
    }
    mpfr_mul(zn, zn, zz, MPFR_RNDN);
  }
  double r = mpfr_get_d(sum, MPFR_RNDN);
  mpfr_clears(sum, term, zz, g, arg, zn, a, b, (mpfr_ptr)nullptr);
  return r;
}

}  // namespace oracle_mp
