#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cpdc/errors.hpp"
#include "cpdc/pdc_core.hpp"

// Second-harmonic witness observables: the coherent SH field against the
// compensation profile and delay, the normalized correlator traces, the
// rectangle-spectrum closed form, and the incoherent SH spectrum.
namespace cpdc::shg {

using Complex = std::complex<double>;
using pdc_core::SpectraResult;

struct CompensationProfile {
  enum class Mode {
    exact_psi,       // theta(Omega) = psi(Omega): the modulus maximizer
    psi_plus_delay,  // theta(Omega) = psi(Omega) + tau*Omega on the signal
                     // side (Omega > 0) only; the idler side carries no delay
    custom,          // theta_custom per grid point
  };
  Mode mode = Mode::exact_psi;
  double delay_tau = 0.0;            // s, used by psi_plus_delay
  std::vector<double> theta_custom;  // rad, grid-sized, used by custom
};

struct ShgDiagnostics {
  double boundary_fraction = 0.0;   // integrand at the grid edge / its max
  double richardson_residual = 0.0; // |fine - coarse| / |fine| of the quadrature
  std::vector<std::string> warnings;
};

// E_coh = (1/pi) * integral over Omega in (0, omega0) of
//   |U(Omega) V(Omega)| e^{i [2 psi(Omega) - theta(Omega) - theta(-Omega)]}
// by midpoint quadrature on the grid (the grid points are cell midpoints).
// Throws QuadratureError when the integrand is badly truncated at the grid
// boundary (> 20% of its peak) or when the delay phase oscillates faster
// than 8 samples per cycle; softer findings land in diag->warnings.
Complex coherent_field(const SpectraResult& spectra, const CompensationProfile& comp,
                       ShgDiagnostics* diag = nullptr);

struct CorrelatorTrace {
  std::vector<double> taus;    // s
  std::vector<Complex> E_coh;  // un-normalized field
  std::vector<double> Phi;     // |E|^2 / max |E|^2
  std::vector<double> X;       // 2 Re(e^{-i phi} E) / max |E|
};

// Per-tau coherent field in psi_plus_delay mode, normalized so max Phi = 1.
CorrelatorTrace correlator_trace(const SpectraResult& spectra,
                                 const std::vector<double>& tau_samples,
                                 double pump_phase, int threads = 1,
                                 ShgDiagnostics* diag = nullptr);

// Flat-band closed form: (1/pi) U0 V0 DeltaOmega e^{-i Omega_s tau}
// sinc(DeltaOmega tau / 2).
Complex rectangle_approx(double U0, double V0, double Omega_s, double DeltaOmega,
                         double tau);

// Incoherent SH spectrum: 2 (1/2pi)^2 * integral of |V(Omega)|^2
// |V(omega - omega_p - Omega)|^2 dOmega (autocorrelation of |V|^2), with
// |V|^2 linearly interpolated on the grid and zero outside it.
std::vector<double> sh_incoherent_spectrum(const SpectraResult& spectra,
                                           const std::vector<double>& omega_grid);

// Central signal frequency: the |UV|-weighted mean of Omega over Omega > 0.
double signal_central_frequency(const SpectraResult& spectra);

}  // namespace cpdc::shg
