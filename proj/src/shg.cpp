#include "cpdc/shg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace cpdc::shg {

namespace {

constexpr double kBoundaryHard = 0.20;
constexpr double kBoundarySoft = 0.05;
// Fastest tolerated delay phase: 8 samples per cycle.
constexpr double kMaxPhaseStep = 2.0 * M_PI / 8.0;

struct HalfGrid {
  std::size_t first;             // index of the first positive detuning
  double delta;                  // grid spacing
  std::vector<double> modulus;   // |U V| on the positive half
  double modulus_max = 0.0;
  double modulus_sum = 0.0;
};

HalfGrid positive_half(const SpectraResult& spectra) {
  const std::size_t n = spectra.grid.size();
  if (n < 2 || spectra.coeffs.size() != n) {
    throw DomainError("spectra grid is empty or inconsistent");
  }
  HalfGrid h;
  h.first = n / 2;
  h.delta = spectra.grid.spacing();
  h.modulus.resize(n - h.first);
  for (std::size_t j = h.first; j < n; ++j) {
    const double m = std::abs(spectra.coeffs[j].U) * std::abs(spectra.coeffs[j].V);
    h.modulus[j - h.first] = m;
    h.modulus_max = std::fmax(h.modulus_max, m);
    h.modulus_sum += m;
  }
  return h;
}

void check_boundary(const HalfGrid& h, ShgDiagnostics* diag) {
  const double frac =
      h.modulus_max > 0.0 ? h.modulus.back() / h.modulus_max : 0.0;
  if (diag) diag->boundary_fraction = frac;
  if (frac > kBoundaryHard) {
    throw QuadratureError(
        "integrand is truncated at the grid boundary (edge fraction " +
        std::to_string(frac) + "); widen the detuning window");
  }
  if (frac > kBoundarySoft && diag) {
    diag->warnings.push_back("integrand boundary fraction " +
                             std::to_string(frac) + " exceeds 5%");
  }
}

void check_delay_sampling(double tau, double delta) {
  if (std::fabs(tau) * delta > kMaxPhaseStep) {
    throw QuadratureError(
        "delay phase advances faster than 8 samples per cycle at tau = " +
        std::to_string(tau) + "; increase grid_points");
  }
}

}  // namespace

Complex coherent_field(const SpectraResult& spectra, const CompensationProfile& comp,
                       ShgDiagnostics* diag) {
  const HalfGrid h = positive_half(spectra);
  check_boundary(h, diag);

  const std::size_t n = spectra.grid.size();
  if (comp.mode == CompensationProfile::Mode::custom &&
      comp.theta_custom.size() != n) {
    throw DomainError("custom compensation profile must match the grid size");
  }
  if (comp.mode == CompensationProfile::Mode::psi_plus_delay) {
    check_delay_sampling(comp.delay_tau, h.delta);
  }

  // Residual phase 2 psi - theta(Omega) - theta(-Omega), reduced per mode:
  // the exact profile cancels it identically, and the delayed profile leaves
  // exactly -tau Omega (psi is shared by the pair). Only the custom profile
  // needs the full expression.
  auto phase_at = [&](std::size_t j) -> double {
    switch (comp.mode) {
      case CompensationProfile::Mode::exact_psi:
        return 0.0;
      case CompensationProfile::Mode::psi_plus_delay:
        return -(comp.delay_tau * spectra.grid.detunings[j]);
      case CompensationProfile::Mode::custom:
      default:
        return 2.0 * spectra.coeffs[j].psi - comp.theta_custom[j] -
               comp.theta_custom[spectra.grid.paired_index(j)];
    }
  };

  Complex fine{0.0, 0.0};
  Complex coarse{0.0, 0.0};
  for (std::size_t q = 0; q < h.modulus.size(); ++q) {
    const Complex term = std::polar(h.modulus[q], phase_at(h.first + q));
    fine += term;
    if (q % 2 == 1) coarse += term;
  }
  const Complex E = fine * (h.delta / M_PI);

  if (diag) {
    // Convergence indicator: the same rule on every other sample, normalized
    // by the largest field the weights could produce (|E| itself may vanish).
    const double e_max = h.modulus_sum * h.delta / M_PI;
    const double diff = std::abs(E - coarse * (2.0 * h.delta / M_PI));
    diag->richardson_residual = e_max > 0.0 ? diff / e_max : 0.0;
  }
  return E;
}

CorrelatorTrace correlator_trace(const SpectraResult& spectra,
                                 const std::vector<double>& tau_samples,
                                 double pump_phase, int threads,
                                 ShgDiagnostics* diag) {
  const HalfGrid h = positive_half(spectra);
  check_boundary(h, diag);
  double tau_extreme = 0.0;
  for (double t : tau_samples) {
    if (!std::isfinite(t)) throw DomainError("tau samples must be finite");
    tau_extreme = std::fmax(tau_extreme, std::fabs(t));
  }
  check_delay_sampling(tau_extreme, h.delta);

  const std::size_t nt = tau_samples.size();
  CorrelatorTrace tr;
  tr.taus = tau_samples;
  tr.E_coh.resize(nt);
  tr.Phi.resize(nt);
  tr.X.resize(nt);
  std::vector<double> residuals(std::max(1, threads), 0.0);

  const double e_max_norm = h.modulus_sum * h.delta / M_PI;
  auto work = [&](std::size_t lo, std::size_t hi, double* res_slot,
                  std::exception_ptr* err) {
    try {
      for (std::size_t i = lo; i < hi; ++i) {
        const double tau = tau_samples[i];
        Complex fine{0.0, 0.0};
        Complex coarse{0.0, 0.0};
        for (std::size_t q = 0; q < h.modulus.size(); ++q) {
          const double Om = spectra.grid.detunings[h.first + q];
          const Complex term = std::polar(h.modulus[q], -(tau * Om));
          fine += term;
          if (q % 2 == 1) coarse += term;
        }
        tr.E_coh[i] = fine * (h.delta / M_PI);
        if (e_max_norm > 0.0) {
          const double diff =
              std::abs(tr.E_coh[i] - coarse * (2.0 * h.delta / M_PI));
          *res_slot = std::fmax(*res_slot, diff / e_max_norm);
        }
      }
    } catch (...) {
      *err = std::current_exception();
    }
  };

  const int nthreads =
      std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(nt, 1))));
  if (nthreads == 1) {
    std::exception_ptr err;
    work(0, nt, &residuals[0], &err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nthreads);
    const std::size_t chunk = (nt + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t lo = std::min(nt, chunk * static_cast<std::size_t>(t));
      const std::size_t hi = std::min(nt, lo + chunk);
      pool.emplace_back(work, lo, hi, &residuals[t], &errs[t]);
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }
  if (diag) {
    for (double r : residuals) {
      diag->richardson_residual = std::fmax(diag->richardson_residual, r);
    }
  }

  double peak = 0.0;
  for (const Complex& e : tr.E_coh) peak = std::fmax(peak, std::abs(e));
  if (peak == 0.0) {
    std::fill(tr.Phi.begin(), tr.Phi.end(), 0.0);
    std::fill(tr.X.begin(), tr.X.end(), 0.0);
    return tr;
  }
  const Complex rot = std::polar(1.0, -pump_phase);
  for (std::size_t i = 0; i < nt; ++i) {
    const double a = std::abs(tr.E_coh[i]) / peak;
    tr.Phi[i] = a * a;
    tr.X[i] = 2.0 * (rot * tr.E_coh[i]).real() / peak;
  }
  return tr;
}

Complex rectangle_approx(double U0, double V0, double Omega_s, double DeltaOmega,
                         double tau) {
  if (!(DeltaOmega > 0.0)) throw DomainError("bandwidth must be positive");
  const double x = DeltaOmega * tau / 2.0;
  const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
  return (U0 * V0 * DeltaOmega / M_PI) * sinc * std::polar(1.0, -(Omega_s * tau));
}

std::vector<double> sh_incoherent_spectrum(const SpectraResult& spectra,
                                           const std::vector<double>& omega_grid) {
  const std::size_t n = spectra.grid.size();
  if (n < 2 || spectra.coeffs.size() != n) {
    throw DomainError("spectra grid is empty or inconsistent");
  }
  const double delta = spectra.grid.spacing();
  const double Om_lo = spectra.grid.detunings.front();
  const double omega_p = 2.0 * spectra.grid.omega0;
  std::vector<double> b2(n);
  for (std::size_t j = 0; j < n; ++j) b2[j] = std::norm(spectra.coeffs[j].V);

  auto interp = [&](double Om) -> double {
    const double t = (Om - Om_lo) / delta;
    if (t <= 0.0 || t >= static_cast<double>(n - 1)) return 0.0;
    const std::size_t i = static_cast<std::size_t>(t);
    const double f = t - static_cast<double>(i);
    return b2[i] + f * (b2[i + 1] - b2[i]);
  };

  const double front = 2.0 * delta / (4.0 * M_PI * M_PI);
  std::vector<double> out(omega_grid.size(), 0.0);
  for (std::size_t k = 0; k < omega_grid.size(); ++k) {
    const double shift = omega_grid[k] - omega_p;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += b2[j] * interp(shift - spectra.grid.detunings[j]);
    }
    out[k] = front * acc;
  }
  return out;
}

double signal_central_frequency(const SpectraResult& spectra) {
  const HalfGrid h = positive_half(spectra);
  if (!(h.modulus_sum > 0.0)) {
    throw DomainError("central frequency undefined for a vanishing integrand");
  }
  double acc = 0.0;
  for (std::size_t q = 0; q < h.modulus.size(); ++q) {
    acc += h.modulus[q] * spectra.grid.detunings[h.first + q];
  }
  return acc / h.modulus_sum;
}

}  // namespace cpdc::shg
