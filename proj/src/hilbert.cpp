#include "igs/hilbert.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "igs/error.hpp"

namespace igs {

namespace {

std::uint64_t ket_key(const BasisKet& ket) {
  return (static_cast<std::uint64_t>(ket.phonons) << 32) | ket.ion_bits;
}

}  // namespace

IonConfig::IonConfig(int n_ions) : n_ions_(n_ions) {
  if (n_ions < 2 || n_ions % 2 != 0) {
    throw ConfigError("ion count must be an even integer >= 2, got " + std::to_string(n_ions));
  }
  if (n_ions > kMaxIons) {
    throw ConfigError("ion count " + std::to_string(n_ions) + " exceeds supported maximum " +
                      std::to_string(kMaxIons));
  }
}

int BasisKet::ionic_excitations() const noexcept { return std::popcount(ion_bits); }

SectorBasis::SectorBasis(IonConfig config) : config_(config) {
  const int n = config_.n_ions();
  const int half = config_.excitations();
  const IonMask end = IonMask{1} << n;

  std::int64_t total = 0;
  for (int ni = 0; ni <= half; ++ni) total += binomial(n, ni);
  kets_.reserve(static_cast<std::size_t>(total));

  for (int ni = half; ni >= 0; --ni) {
    for (IonMask bits = 0; bits < end; ++bits) {
      if (std::popcount(bits) == ni) kets_.push_back({bits, half - ni});
    }
  }
  database_size_ = static_cast<int>(binomial(n, half));

  index_.reserve(kets_.size());
  for (int i = 0; i < dimension(); ++i) index_.emplace(ket_key(kets_[static_cast<std::size_t>(i)]), i);
}

int SectorBasis::index_of(const BasisKet& ket) const {
  auto it = index_.find(ket_key(ket));
  if (it == index_.end()) {
    throw ConfigError("ket |" + format_ion_bits(ket.ion_bits, config_.n_ions()) + ", n_p=" +
                      std::to_string(ket.phonons) + "> is not in the sector");
  }
  return it->second;
}

bool SectorBasis::contains(const BasisKet& ket) const noexcept {
  return index_.contains(ket_key(ket));
}

SectorBasisPtr build_sector_basis(const IonConfig& config) {
  return std::make_shared<const SectorBasis>(config);
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

std::int64_t database_dimension(const IonConfig& config) {
  return binomial(config.n_ions(), config.excitations());
}

double database_dimension_asymptotic(const IonConfig& config) {
  const double n = config.n_ions();
  return std::exp2(n) / std::sqrt(std::numbers::pi * n / 2.0) * (1.0 - 1.0 / (4.0 * n));
}

IonMask parse_ion_bits(std::string_view bits, int n_ions) {
  if (static_cast<int>(bits.size()) != n_ions) {
    throw ConfigError("bitstring '" + std::string(bits) + "' must have length " +
                      std::to_string(n_ions));
  }
  IonMask mask = 0;
  for (int k = 0; k < n_ions; ++k) {
    const char c = bits[static_cast<std::size_t>(k)];
    if (c == '1') {
      mask |= IonMask{1} << k;
    } else if (c != '0') {
      throw ConfigError("bitstring '" + std::string(bits) + "' may contain only 0 and 1");
    }
  }
  return mask;
}

std::string format_ion_bits(IonMask bits, int n_ions) {
  std::string out(static_cast<std::size_t>(n_ions), '0');
  for (int k = 0; k < n_ions; ++k) {
    if ((bits >> k) & 1U) out[static_cast<std::size_t>(k)] = '1';
  }
  return out;
}

BasisKet marked_ket(const IonConfig& config, IonMask bits) {
  if (bits >> config.n_ions() != 0 || std::popcount(bits) != config.excitations()) {
    throw InvalidMarkedState("marked state " + format_ion_bits(bits, config.n_ions()) +
                             " must excite exactly " + std::to_string(config.excitations()) +
                             " of " + std::to_string(config.n_ions()) + " ions");
  }
  return {bits, 0};
}

BasisKet marked_ket(const IonConfig& config, std::string_view bits) {
  return marked_ket(config, parse_ion_bits(bits, config.n_ions()));
}

StateVector::StateVector(SectorBasisPtr basis)
    : basis_(std::move(basis)), amplitudes_(Eigen::VectorXcd::Zero(basis_->dimension())) {}

StateVector::StateVector(SectorBasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != basis_->dimension()) {
    throw ConfigError("amplitude vector length " + std::to_string(amplitudes_.size()) +
                      " does not match sector dimension " + std::to_string(basis_->dimension()));
  }
}

StateVector StateVector::basis_state(SectorBasisPtr basis, int index) {
  StateVector s(std::move(basis));
  s.amplitudes_(index) = 1.0;
  return s;
}

cplx StateVector::inner(const StateVector& other) const {
  return amplitudes_.dot(other.amplitudes_);
}

void StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw NumericalError("cannot normalize a zero state");
  amplitudes_ /= n;
}

}  // namespace igs
