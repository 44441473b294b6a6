#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace igs {

using cplx = std::complex<double>;
using IonMask = std::uint32_t;

inline constexpr int kMaxIons = 24;

// A chain of N ions sharing N/2 excitations between internal states and the
// centre-of-mass phonon mode.
class IonConfig {
 public:
  explicit IonConfig(int n_ions);

  int n_ions() const noexcept { return n_ions_; }
  int excitations() const noexcept { return n_ions_ / 2; }
  IonMask all_ions() const noexcept { return (IonMask{1} << n_ions_) - 1; }

  friend bool operator==(const IonConfig&, const IonConfig&) = default;

 private:
  int n_ions_;
};

// Ion k (1-based) is bit k-1 of ion_bits.
struct BasisKet {
  IonMask ion_bits = 0;
  int phonons = 0;

  int ionic_excitations() const noexcept;
  friend bool operator==(const BasisKet&, const BasisKet&) = default;
};

class SectorBasis {
 public:
  explicit SectorBasis(IonConfig config);

  const IonConfig& config() const noexcept { return config_; }
  int dimension() const noexcept { return static_cast<int>(kets_.size()); }
  // Size of the n_p = 0 manifold; these kets occupy positions [0, database_size).
  int database_size() const noexcept { return database_size_; }

  const std::vector<BasisKet>& kets() const noexcept { return kets_; }
  const BasisKet& ket(int index) const { return kets_.at(static_cast<std::size_t>(index)); }

  // Position of a sector ket; throws ConfigError if the ket is outside the sector.
  int index_of(const BasisKet& ket) const;
  bool contains(const BasisKet& ket) const noexcept;

 private:
  IonConfig config_;
  std::vector<BasisKet> kets_;
  std::unordered_map<std::uint64_t, int> index_;
  int database_size_ = 0;
};

using SectorBasisPtr = std::shared_ptr<const SectorBasis>;

SectorBasisPtr build_sector_basis(const IonConfig& config);

// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
std::int64_t binomial(int n, int k);

// C(N, N/2).
std::int64_t database_dimension(const IonConfig& config);

// Large-N estimate 2^N / sqrt(pi N / 2) * (1 - 1/(4N)).
double database_dimension_asymptotic(const IonConfig& config);

// "111000" -> 0b000111: the leftmost character is ion 1.
IonMask parse_ion_bits(std::string_view bits, int n_ions);
std::string format_ion_bits(IonMask bits, int n_ions);

BasisKet marked_ket(const IonConfig& config, std::string_view bits);
BasisKet marked_ket(const IonConfig& config, IonMask bits);

class StateVector {
 public:
  explicit StateVector(SectorBasisPtr basis);
  StateVector(SectorBasisPtr basis, Eigen::VectorXcd amplitudes);

  static StateVector basis_state(SectorBasisPtr basis, int index);

  const SectorBasis& basis() const noexcept { return *basis_; }
  const SectorBasisPtr& basis_ptr() const noexcept { return basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amplitudes_; }

  cplx operator[](int index) const { return amplitudes_(index); }
  double norm() const { return amplitudes_.norm(); }
  double population(int index) const { return std::norm(amplitudes_(index)); }

  // <this|other>
  cplx inner(const StateVector& other) const;
  void normalize();

 private:
  SectorBasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

}  // namespace igs
