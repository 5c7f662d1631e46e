#include "nld/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace nld {

void KernelSpec::validate() const {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("kernel: beta must lie strictly in (0, 1)");
  if (!(gamma_lo > 0.0))
    throw std::invalid_argument("kernel: gamma_lo must be positive");
  if (!(gamma_hi >= gamma_lo))
    throw std::invalid_argument("kernel: gamma_hi must be >= gamma_lo");
  if (!(horizon > 0.0))
    throw std::invalid_argument("kernel: horizon must be positive");
}

double KernelSpec::value(double r, int dim) const {
  if (r >= horizon) return 0.0;
  const double p = std::pow(r, dim + 2.0 * beta);
  switch (form) {
    case Form::Power:
      return gamma_lo / p;
    case Form::Bounded: {
      const double blend = 0.5 * (1.0 + std::cos(M_PI * r / horizon));
      return (gamma_lo + (gamma_hi - gamma_lo) * blend) / p;
    }
  }
  return 0.0;
}

void TensorField::validate() const {
  if (!(scale > 0.0))
    throw std::invalid_argument("tensor: scale must be positive");
}

std::array<double, 2> AntisymmetricField::value(const std::array<double, 2>& x,
                                                const std::array<double, 2>& y,
                                                int dim) const {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (y[a] - x[a]) * (y[a] - x[a]);
  const double r = std::sqrt(r2);
  std::array<double, 2> out{0.0, 0.0};
  if (r == 0.0 || r >= kernel.horizon) return out;
  // alpha . (Theta alpha) = s^2 r^2 scale with s below, which equals gamma.
  const double s = std::sqrt(kernel.value(r, dim) / theta.scale) / r;
  for (int a = 0; a < dim; ++a) out[a] = (y[a] - x[a]) * s;
  return out;
}

}  // namespace nld
