#include "cpdc/pdc_core.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "cpdc/specfun.hpp"

namespace cpdc::pdc_core {

namespace {

using specfun::kInvSqrt2;

// Below this the basis prefactors (~ nu^{+-1/2}) lose accuracy faster than
// the first-order-in-sigma closed forms do.
constexpr double kLowGainNuCut = 1e-6;

void require_unitary(const Complex& A, const Complex& B) {
  const double nA = std::norm(A);
  const double nB = std::norm(B);
  const double residual = std::fabs(nA - nB - 1.0);
  if (!(residual <= 1e-6 * std::max(1.0, nA + nB))) {
    throw UnitarityError("transfer pair violates |A|^2 - |B|^2 = 1 (residual " +
                         std::to_string(residual) + ")");
  }
}

// 1/W for the basis cross products, W = e^{-i pi/4} e^{pi nu / 2}.
Complex w_inverse(double nu) {
  const double s = std::exp(-M_PI * nu / 2.0);
  return Complex{s * kInvSqrt2, s * kInvSqrt2};
}

struct BasisAt {
  Complex f1, f2;    // phi_1, phi_2
  Complex r1, r2;    // reciprocal partners
};

BasisAt eval_full(double x, double nu) {
  BasisAt b;
  b.f1 = specfun::pcf_basis(1, x, nu).value;
  b.f2 = specfun::pcf_basis(2, x, nu).value;
  b.r1 = specfun::pcf_d_reciprocal(specfun::PcfOrderTag::d_i_nu, x, nu).value;
  b.r2 = specfun::pcf_d_reciprocal(specfun::PcfOrderTag::d_minus1_minus_i_nu, x, nu).value;
  return b;
}

}  // namespace

ScaledCoords scaled_coords(const CrystalConfig& config, double Omega) {
  if (!(config.chirp_zeta > 0.0)) throw DomainError("chirp must be positive");
  if (!(config.length_L > 0.0)) throw DomainError("length must be positive");
  const double Delta = dispersion::phase_mismatch(config, Omega);
  return make_scaled_coords(Delta, config.chirp_zeta, config.length_L,
                            config.coupling_kappa_mag);
}

Complex low_gain_A(const ScaledCoords& coords) {
  const double phase = -(coords.xL - coords.x0) * (coords.xL + coords.x0) / 4.0;
  return std::polar(1.0, phase);
}

Complex low_gain_B(const ScaledCoords& coords) {
  const Complex c{0.5, 0.5};
  const Complex diff = specfun::erfi_c(c * coords.xL) - specfun::erfi_c(c * coords.x0);
  const double phase = -(coords.xL * coords.xL + coords.x0 * coords.x0) / 4.0;
  const Complex front{std::sqrt(M_PI) / 2.0, -std::sqrt(M_PI) / 2.0};
  return coords.sigma * front * std::polar(1.0, phase) * diff;
}

ABPair transfer_AB(const ScaledCoords& coords) {
  ABPair out;
  if (coords.nu < kLowGainNuCut) {
    out.B = low_gain_B(coords);
    // The first-order phase is exact in this limit; pin the modulus so the
    // pair is unitary by construction.
    out.A = low_gain_A(coords) * std::sqrt(1.0 + std::norm(out.B));
    require_unitary(out.A, out.B);
    return out;
  }
  const BasisAt in = eval_full(coords.x0, coords.nu);
  const Complex f1L = specfun::pcf_basis(1, coords.xL, coords.nu).value;
  const Complex f2L = specfun::pcf_basis(2, coords.xL, coords.nu).value;
  const Complex winv = w_inverse(coords.nu);
  out.A = coords.sigma * winv * (f1L * in.r2 - f2L * in.r1);
  out.B = coords.sigma * winv * (f2L * in.f1 - f1L * in.f2);
  require_unitary(out.A, out.B);
  return out;
}

ABPair transfer_AB_tilde(const ScaledCoords& coords) {
  ABPair out;
  if (coords.nu < kLowGainNuCut) {
    ABPair fwd = transfer_AB(coords);
    out.A = std::conj(fwd.A);
    out.B = std::conj(fwd.B);
    return out;
  }
  const BasisAt in = eval_full(coords.x0, coords.nu);
  const Complex r1L =
      specfun::pcf_d_reciprocal(specfun::PcfOrderTag::d_i_nu, coords.xL, coords.nu).value;
  const Complex r2L = specfun::pcf_d_reciprocal(specfun::PcfOrderTag::d_minus1_minus_i_nu,
                                                coords.xL, coords.nu).value;
  const Complex winv = w_inverse(coords.nu);
  out.A = coords.sigma * winv * (r2L * in.f1 - r1L * in.f2);
  out.B = coords.sigma * winv * (r1L * in.r2 - r2L * in.r1);
  require_unitary(out.A, out.B);
  return out;
}

UVPair transfer_UV(const CrystalConfig& config, double Omega, Complex A, Complex B) {
  const double L = config.length_L;
  const double kL = dispersion::wavevector(config, Omega) * L;
  const double Delta = dispersion::phase_mismatch(config, Omega);
  const double half_phase = 0.5 * (Delta * L + config.chirp_zeta * L * L / 2.0);
  const Complex common = std::polar(1.0, kL + half_phase);
  UVPair uv;
  uv.U = A * common;
  uv.V = Complex{0.0, 1.0} * B * common * std::polar(1.0, config.pump_phase_phi);
  return uv;
}

double optical_spectrum(Complex V) { return std::norm(V) / (2.0 * M_PI); }

SqueezeTriple squeezing_spectrum(Complex U, Complex V) {
  const double nU = std::norm(U);
  const double nV = std::norm(V);
  const double residual = std::fabs(nU - nV - 1.0);
  if (!(residual <= 1e-6 * std::max(1.0, nU + nV))) {
    throw UnitarityError("U, V pair violates |U|^2 - |V|^2 = 1 (residual " +
                         std::to_string(residual) + ")");
  }
  // e^{2r} = (|U| + |V|)^2 is exact under |U|^2 - |V|^2 = 1 and avoids the
  // catastrophic cancellation of the equivalent (|U| - |V|)^{-2} form.
  SqueezeTriple t;
  const double em = std::abs(U) + std::abs(V);
  t.S1 = em * em;
  t.S2 = 1.0 / t.S1;
  t.r = std::log(em);
  return t;
}

double squeezing_angle(Complex U_pos, Complex V_neg) {
  if (std::abs(V_neg) < 1e-12) {
    throw UndefinedAngleError("squeezing angle undefined at negligible gain");
  }
  return 0.5 * std::arg(U_pos * V_neg);
}

UnwrapResult unwrap_phase(const std::vector<double>& samples) {
  UnwrapResult res;
  res.values = samples;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double d = samples[i] - samples[i - 1];
    const double red = d - M_PI * std::round(d / M_PI);
    res.values[i] = res.values[i - 1] + red;
    const double mag = std::fabs(red);
    res.max_raw_step = std::fmax(res.max_raw_step, mag);
    if (mag >= 0.45 * M_PI) res.aliasing_warning = true;
  }
  return res;
}

double compensation_angle(const CrystalConfig& config, double Omega) {
  const double Delta = dispersion::phase_mismatch(config, Omega);
  const double ksumL = dispersion::k_sum(config, Omega) * config.length_L;
  return Delta * Delta / (4.0 * config.chirp_zeta) - ksumL / 2.0;
}

bool in_band(const ScaledCoords& coords) {
  return coords.x0 < -5.0 && coords.xL > 5.0;
}

bool in_plateau(const ScaledCoords& coords) {
  return coords.x0 <= -50.0 * std::sqrt(coords.nu) && coords.xL >= 10.0;
}

SpectraResult compute_spectra(const CrystalConfig& config, const DetuningGrid& grid,
                              int threads) {
  const std::size_t n = grid.size();
  if (n < 2 || n % 2 != 0) throw DomainError("detuning grid must have even size >= 2");

  SpectraResult out;
  out.grid = grid;
  out.coeffs.resize(n);
  out.S_optical.resize(n);
  out.S_squeeze.resize(n);
  out.S_stretch.resize(n);
  out.psi_unwrapped.resize(n);
  out.theta0.resize(n);

  const std::size_t pairs = n / 2;
  std::vector<double> psi_raw_pos(pairs);  // psi at detunings[n/2 + p]
  std::vector<double> residual_max(std::max(1, threads), 0.0);

  auto work = [&](std::size_t lo, std::size_t hi, double* res_slot,
                  std::exception_ptr* err) {
    try {
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t j_neg = p;
        const std::size_t j_pos = n - 1 - p;
        const double Om_pos = grid.detunings[j_pos];
        const ScaledCoords sc = scaled_coords(config, Om_pos);
        const ABPair ab = transfer_AB(sc);
        *res_slot = std::fmax(
            *res_slot, std::fabs(std::norm(ab.A) - std::norm(ab.B) - 1.0));

        // A, B, psi, theta0 are even: evaluate once per pair and mirror, so
        // the symmetry is bitwise no matter how the grid is split.
        const UVPair uv_pos = transfer_UV(config, Om_pos, ab.A, ab.B);
        const UVPair uv_neg = transfer_UV(config, grid.detunings[j_neg], ab.A, ab.B);
        const double psi = squeezing_angle(uv_pos.U, uv_neg.V);
        const double th = compensation_angle(config, Om_pos);
        psi_raw_pos[j_pos - pairs] = psi;

        const UVPair* uvs[2] = {&uv_neg, &uv_pos};
        const std::size_t idx[2] = {j_neg, j_pos};
        for (int s = 0; s < 2; ++s) {
          TransferCoefficients& tc = out.coeffs[idx[s]];
          tc.A = ab.A;
          tc.B = ab.B;
          tc.U = uvs[s]->U;
          tc.V = uvs[s]->V;
          tc.psi = psi;  // replaced by the unwrapped value below
          out.S_optical[idx[s]] = optical_spectrum(uvs[s]->V);
          const SqueezeTriple sq = squeezing_spectrum(uvs[s]->U, uvs[s]->V);
          out.S_squeeze[idx[s]] = sq.S2;
          out.S_stretch[idx[s]] = sq.S1;
          tc.r = sq.r;
          out.theta0[idx[s]] = th;
        }
      }
    } catch (...) {
      *err = std::current_exception();
    }
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(pairs)));
  if (nthreads == 1) {
    std::exception_ptr err;
    work(0, pairs, &residual_max[0], &err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nthreads);
    const std::size_t chunk = (pairs + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = std::min(pairs, chunk * static_cast<std::size_t>(t));
      const std::size_t hi = std::min(pairs, lo + chunk);
      pool.emplace_back(work, lo, hi, &residual_max[t], &errs[t]);
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (double r : residual_max) {
    out.max_unitarity_residual = std::fmax(out.max_unitarity_residual, r);
  }

  // Unwrap outward from the centre on the positive half, then mirror, which
  // keeps the unwrapped angle bitwise even too.
  UnwrapResult un = unwrap_phase(psi_raw_pos);
  out.psi_aliasing_warning = un.aliasing_warning;
  for (std::size_t p = 0; p < pairs; ++p) {
    out.psi_unwrapped[pairs + p] = un.values[p];
    out.psi_unwrapped[pairs - 1 - p] = un.values[p];
  }
  for (std::size_t j = 0; j < n; ++j) out.coeffs[j].psi = out.psi_unwrapped[j];
  return out;
}

}  // namespace cpdc::pdc_core
