#include "repread/spin_model.hpp"

#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>

#include "repread/error.hpp"

namespace repread {

namespace {

constexpr std::array<ElectronProjection, 4> kElectronOrder = {
    ElectronProjection::plus_3_2, ElectronProjection::plus_1_2,
    ElectronProjection::minus_1_2, ElectronProjection::minus_3_2};

constexpr double kS = 1.5;

void require_finite(double x, const char *name) {
  if (!std::isfinite(x))
    throw InvalidParameter(std::string("non-finite ") + name);
}

}  // namespace

std::string to_string(ElectronProjection m) {
  switch (m) {
    case ElectronProjection::plus_3_2: return "+3/2";
    case ElectronProjection::plus_1_2: return "+1/2";
    case ElectronProjection::minus_1_2: return "-1/2";
    case ElectronProjection::minus_3_2: return "-3/2";
  }
  return "?";
}

std::string to_string(NuclearProjection m) {
  return m == NuclearProjection::up ? "up" : "down";
}

void SpinSystem::validate() const {
  require_finite(d_ground, "D_ground");
  require_finite(d_excited, "D_excited");
  require_finite(gamma_e, "gamma_e");
  require_finite(gamma_n, "gamma_n");
  require_finite(b_z, "B_z");
  for (const HyperfineTensor *hf : {&hf_ground, hf_excited ? &*hf_excited : nullptr}) {
    if (!hf) continue;
    require_finite(hf->a_xx, "A_xx");
    require_finite(hf->a_yy, "A_yy");
    require_finite(hf->a_zz, "A_zz");
  }
  if (b_z < 0.0) throw InvalidParameter("B_z must be >= 0");
}

int basis_index(ElectronProjection ms, NuclearProjection mi) {
  const int i_s = (3 - static_cast<int>(ms)) / 2;
  return 2 * i_s + (mi == NuclearProjection::up ? 0 : 1);
}

ElectronProjection basis_electron(int index) { return kElectronOrder.at(index / 2); }

NuclearProjection basis_nuclear(int index) {
  return index % 2 == 0 ? NuclearProjection::up : NuclearProjection::down;
}

HamiltonianMatrix build_hamiltonian(const SpinSystem &sys, ElectronicState state) {
  sys.validate();
  const HyperfineTensor &hf = sys.hyperfine(state);
  const double d = sys.zero_field_splitting(state);
  const double a_perp = hf.a_perp();
  const double a_par = hf.a_par();

  HamiltonianMatrix h = HamiltonianMatrix::Zero();
  for (int row = 0; row < kSpinDim; ++row) {
    const double ms = value(basis_electron(row));
    const double mi = value(basis_nuclear(row));
    h(row, row) = d * (ms * ms + kS * (kS + 1.0) / 3.0) + sys.gamma_e * sys.b_z * ms +
                  a_par * ms * mi + sys.gamma_n * sys.b_z * mi;
  }

  // A_perp (SxIx + SyIy) = A_perp/2 (S+I- + S-I+): couples |ms, up> with
  // |ms+1, down>, matrix element A_perp/2 * sqrt(S(S+1) - ms(ms+1)).
  for (int i_s = 1; i_s < 4; ++i_s) {
    const ElectronProjection lower = kElectronOrder[i_s];
    const ElectronProjection upper = kElectronOrder[i_s - 1];
    const double ms = value(lower);
    const double elem = 0.5 * a_perp * std::sqrt(kS * (kS + 1.0) - ms * (ms + 1.0));
    const int a = basis_index(lower, NuclearProjection::up);
    const int b = basis_index(upper, NuclearProjection::down);
    h(a, b) = elem;
    h(b, a) = elem;
  }
  return h;
}

bool EnergyLevels::high_field_labels() const {
  std::array<bool, kSpinDim> seen{};
  for (const Level &lvl : levels) {
    if (lvl.overlap <= 0.5) return false;
    const int idx = basis_index(lvl.ms, lvl.mi);
    if (seen[idx]) return false;
    seen[idx] = true;
  }
  return true;
}

const Level &EnergyLevels::find(ElectronProjection ms, NuclearProjection mi) const {
  const Level *hit = nullptr;
  for (const Level &lvl : levels) {
    if (lvl.ms != ms || lvl.mi != mi) continue;
    if (hit) throw LabelingError("label |" + to_string(ms) + "," + to_string(mi) +
                                 "> assigned to more than one level");
    hit = &lvl;
  }
  if (!hit) throw LabelingError("no level labelled |" + to_string(ms) + "," + to_string(mi) + ">");
  if (hit->overlap <= 0.5)
    throw LabelingError("level |" + to_string(ms) + "," + to_string(mi) +
                        "> has no dominant product component");
  return *hit;
}

EnergyLevels eigen_levels(const HamiltonianMatrix &h) {
  Eigen::SelfAdjointEigenSolver<HamiltonianMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw InvalidParameter("eigensolver failed");

  EnergyLevels out;
  out.eigenvectors = solver.eigenvectors();
  for (int k = 0; k < kSpinDim; ++k) {
    // Strict comparison keeps the lower basis index on ties.
    int best = 0;
    double best_sq = -1.0;
    for (int i = 0; i < kSpinDim; ++i) {
      const double sq = out.eigenvectors(i, k) * out.eigenvectors(i, k);
      if (sq > best_sq) {
        best_sq = sq;
        best = i;
      }
    }
    out.levels[k] = Level{solver.eigenvalues()(k), basis_electron(best),
                          basis_nuclear(best), best_sq};
  }
  return out;
}

double nuclear_transition_frequency(const EnergyLevels &levels, ElectronProjection ms) {
  const double up = levels.find(ms, NuclearProjection::up).energy;
  const double down = levels.find(ms, NuclearProjection::down).energy;
  return std::abs(up - down);
}

ElectronTransitions electron_transition_frequencies(const EnergyLevels &levels,
                                                     NuclearProjection mi) {
  using EP = ElectronProjection;
  ElectronTransitions t;
  t.upper = std::abs(levels.find(EP::plus_3_2, mi).energy - levels.find(EP::plus_1_2, mi).energy);
  t.lower = std::abs(levels.find(EP::minus_3_2, mi).energy - levels.find(EP::minus_1_2, mi).energy);
  return t;
}

std::string_view to_string(NuclearSpecies species) {
  return species == NuclearSpecies::si29 ? "Si29" : "C13";
}

NuclearSpecies parse_species(std::string_view name) {
  if (name == "Si29" || name == "29Si") return NuclearSpecies::si29;
  if (name == "C13" || name == "13C") return NuclearSpecies::c13;
  throw InvalidParameter("unknown nuclear species '" + std::string(name) + "'");
}

double larmor_frequency(NuclearSpecies species, double b_z, const GyromagneticTable &table) {
  if (!(b_z >= 0.0)) throw InvalidParameter("B_z must be >= 0");
  return std::abs(table[species]) * b_z;
}

}  // namespace repread
