#include "exciton/model.hpp"

#include <cmath>
#include <string>

#include "exciton/error.hpp"

namespace exciton {

void ModelParams::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(g) || !std::isfinite(gamma0) ||
      !std::isfinite(gamma1)) {
    throw Error(ErrorCode::InvalidArgument, "model parameters must be finite");
  }
  if (g <= 0.0) throw Error(ErrorCode::InvalidArgument, "coupling g must be positive");
  if (gamma0 < 0.0 || gamma1 < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "dissipation rates must be non-negative");
  }
}

int excitation_of(BasisLabel label) {
  if (label.photons < 0 || (label.atom != 0 && label.atom != 1)) {
    throw Error(ErrorCode::InvalidArgument, "invalid basis label");
  }
  return label.photons + label.atom;
}

namespace {

void require_sector(int n) {
  if (n <= 0) {
    throw Error(ErrorCode::InvalidExcitation,
                "excitation number must be >= 1, got " + std::to_string(n));
  }
}

}  // namespace

CMat hamiltonian_block(int n, const ModelParams& p) {
  require_sector(n);
  const double c = p.g * std::sqrt(static_cast<double>(n));
  return CMat{{p.delta, c}, {c, -p.delta}};
}

CMat sector_hamiltonian(int n, const ModelParams& p) {
  if (n < 0) throw Error(ErrorCode::InvalidExcitation, "negative excitation number");
  if (n == 0) return CMat{{-p.delta}};
  return hamiltonian_block(n, p);
}

std::pair<double, double> eigenenergies(int n, const ModelParams& p) {
  require_sector(n);
  const double e = std::sqrt(p.delta * p.delta + p.g * p.g * n);
  return {e, -e};
}

double mixing_angle(int n, const ModelParams& p) {
  const double e = eigenenergies(n, p).first;
  // sqrt((E-δ)/(E+δ)) = g√n/(E+δ) = (E-δ)/(g√n); pick the cancellation-free form.
  const double c = p.g * std::sqrt(static_cast<double>(n));
  return p.delta >= 0.0 ? std::atan(c / (e + p.delta)) : std::atan((e - p.delta) / c);
}

CVec dressed_state(int n, DressedBranch branch, const ModelParams& p) {
  const double theta = mixing_angle(n, p);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (branch == DressedBranch::Plus) return {c, s};
  return {-s, c};
}

}  // namespace exciton
