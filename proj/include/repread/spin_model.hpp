#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace repread {

// Electron (S = 3/2) and nuclear (I = 1/2) projections, stored as twice the
// quantum number so that they stay integral.
enum class ElectronProjection : int {
  plus_3_2 = 3,
  plus_1_2 = 1,
  minus_1_2 = -1,
  minus_3_2 = -3,
};

enum class NuclearProjection : int { up = 1, down = -1 };

inline double value(ElectronProjection m) { return static_cast<int>(m) / 2.0; }
inline double value(NuclearProjection m) { return static_cast<int>(m) / 2.0; }

std::string to_string(ElectronProjection m);
std::string to_string(NuclearProjection m);

enum class ElectronicState { ground, excited };

/// Diagonal hyperfine tensor in MHz. The transverse and longitudinal
/// couplings used by the Hamiltonian are derived from it.
struct HyperfineTensor {
  double a_xx = 0.0;
  double a_yy = 0.0;
  double a_zz = 0.0;

  double a_perp() const { return 0.5 * (a_xx + a_yy); }
  double a_par() const { return a_zz; }
  double a_iso() const { return (a_xx + a_yy + a_zz) / 3.0; }
};

/// Electron-nuclear spin system. Frequencies in MHz, field in tesla.
/// `gamma_e` and `gamma_n` are the coefficients multiplying B_z S_z and
/// B_z I_z in the Hamiltonian (MHz/T), signs included.
struct SpinSystem {
  double d_ground = 0.0;
  double d_excited = 0.0;
  double gamma_e = 0.0;
  double gamma_n = 0.0;
  double b_z = 0.0;
  HyperfineTensor hf_ground;
  // Falls back to hf_ground when absent.
  std::optional<HyperfineTensor> hf_excited;

  void validate() const;
  const HyperfineTensor &hyperfine(ElectronicState state) const {
    return state == ElectronicState::excited && hf_excited ? *hf_excited
                                                            : hf_ground;
  }
  double zero_field_splitting(ElectronicState state) const {
    return state == ElectronicState::excited ? d_excited : d_ground;
  }
};

inline constexpr int kSpinDim = 8;
using HamiltonianMatrix = Eigen::Matrix<double, kSpinDim, kSpinDim>;

/// Product-basis index of |m_s> (x) |m_I>, ordered m_s = +3/2 .. -3/2 and
/// m_I = up, down.
int basis_index(ElectronProjection ms, NuclearProjection mi);
ElectronProjection basis_electron(int index);
NuclearProjection basis_nuclear(int index);

HamiltonianMatrix build_hamiltonian(const SpinSystem &sys, ElectronicState state);

struct Level {
  double energy = 0.0;  // MHz
  ElectronProjection ms = ElectronProjection::plus_1_2;
  NuclearProjection mi = NuclearProjection::up;
  double overlap = 0.0;  // squared overlap with the labelled product state
};

struct EnergyLevels {
  std::array<Level, kSpinDim> levels;  // ascending energy
  HamiltonianMatrix eigenvectors;      // columns match `levels`

  // True when every level has a dominant (> 0.5) product component.
  bool high_field_labels() const;
  const Level &find(ElectronProjection ms, NuclearProjection mi) const;
};

EnergyLevels eigen_levels(const HamiltonianMatrix &h);

double nuclear_transition_frequency(const EnergyLevels &levels, ElectronProjection ms);

struct ElectronTransitions {
  double upper = 0.0;  // |+1/2, m_I> -> |+3/2, m_I>
  double lower = 0.0;  // |-1/2, m_I> -> |-3/2, m_I>
};

ElectronTransitions electron_transition_frequencies(const EnergyLevels &levels,
                                                     NuclearProjection mi);

enum class NuclearSpecies { si29, c13 };

std::string_view to_string(NuclearSpecies species);
NuclearSpecies parse_species(std::string_view name);

/// Signed gyromagnetic ratios in MHz/T.
struct GyromagneticTable {
  double si29 = -8.465;
  double c13 = 10.708;

  double operator[](NuclearSpecies species) const {
    return species == NuclearSpecies::si29 ? si29 : c13;
  }
};

double larmor_frequency(NuclearSpecies species, double b_z,
                        const GyromagneticTable &table = {});

}  // namespace repread
