#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "repread/error.hpp"
#include "repread/spin_model.hpp"

using namespace repread;

namespace {

SpinSystem table_system() {
  SpinSystem s;
  s.d_ground = 35.0;
  s.d_excited = 500.0;
  s.gamma_e = 28024.95;
  s.gamma_n = 8.465;
  s.b_z = 0.14;
  s.hf_ground = {9.00, 9.03, 8.660};
  return s;
}

constexpr std::array<ElectronProjection, 4> kManifolds{ElectronProjection::plus_3_2, ElectronProjection::plus_1_2,
                                                      ElectronProjection::minus_1_2, ElectronProjection::minus_3_2};

}  // namespace

TEST_SUITE("spin_model") {
  TEST_CASE("zero field and no coupling gives D(ms^2 + 5/4), doubly degenerate") {
    SpinSystem s;
    s.d_ground = 35.0;
    const HamiltonianMatrix h = build_hamiltonian(s, ElectronicState::ground);
    CHECK(h.isDiagonal());
    for (int i = 0; i < 8; ++i) {
      const double ms = value(basis_electron(i));
      CHECK(h(i, i) == doctest::Approx(35.0 * (ms * ms + 1.25)).epsilon(1e-15));
    }
    const EnergyLevels lv = eigen_levels(h);
    for (const Level &l : lv.levels) CHECK(l.overlap == doctest::Approx(1.0));
  }

  TEST_CASE("matches a Kronecker-product construction element by element") {
    for (ElectronicState st : {ElectronicState::ground, ElectronicState::excited}) {
      const SpinSystem s = table_system();
      const HamiltonianMatrix h = build_hamiltonian(s, st);
      const HamiltonianMatrix k = oracle::kron_hamiltonian(s, st);
      CHECK((h - k).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("exact symmetry for random inputs") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 50; ++trial) {
      SpinSystem s;
      s.d_ground = u(eng);
      s.gamma_e = 28024.95;
      s.gamma_n = u(eng) / 5;
      s.b_z = std::abs(u(eng)) / 50;
      s.hf_ground = {u(eng), u(eng), u(eng)};
      const HamiltonianMatrix h = build_hamiltonian(s, ElectronicState::ground);
      CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("eigenvalues agree with a Jacobi oracle and conserve the trace") {
    const HamiltonianMatrix h = build_hamiltonian(table_system(), ElectronicState::ground);
    const EnergyLevels lv = eigen_levels(h);
    const std::vector<double> ref = oracle::jacobi_eigenvalues(h);
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
      CHECK(std::abs(lv.levels[i].energy - ref[i]) <= 1e-8 * std::abs(ref[i]) + 1e-10);
      sum += lv.levels[i].energy;
      if (i > 0) CHECK(lv.levels[i].energy >= lv.levels[i - 1].energy);
    }
    CHECK(std::abs(sum - h.trace()) <= 1e-9 * std::abs(h.trace()));
    const auto &v = lv.eigenvectors;
    CHECK((v.transpose() * v - HamiltonianMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(lv.high_field_labels());
  }

  TEST_CASE("diagonal Hamiltonian: eigenvalues are the diagonal") {
    HamiltonianMatrix h = HamiltonianMatrix::Zero();
    for (int i = 0; i < 8; ++i) h(i, i) = 10.0 * i - 3.0;
    const EnergyLevels lv = eigen_levels(h);
    for (int i = 0; i < 8; ++i) {
      CHECK(lv.levels[i].energy == doctest::Approx(10.0 * i - 3.0));
      CHECK(basis_index(lv.levels[i].ms, lv.levels[i].mi) == i);
    }
  }

  TEST_CASE("bare Larmor when A_par = 0") {
    SpinSystem s = table_system();
    s.hf_ground = {};
    const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
    for (ElectronProjection ms : kManifolds)
      CHECK(nuclear_transition_frequency(lv, ms) == doctest::Approx(std::abs(s.gamma_n * s.b_z)).epsilon(1e-10));
  }

  TEST_CASE("secular consistency is exact when A_perp = 0") {
    SpinSystem s = table_system();
    s.hf_ground = {0.0, 0.0, 8.660};
    const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
    for (ElectronProjection ms : kManifolds)
      CHECK(nuclear_transition_frequency(lv, ms) ==
            doctest::Approx(std::abs(value(ms) * 8.660 + s.gamma_n * s.b_z)).epsilon(1e-12));
  }

  TEST_CASE("full diagonalization near the secular limit for +1/2 and the 3/2 manifolds") {
    const SpinSystem s = table_system();
    const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
    for (ElectronProjection ms : {ElectronProjection::plus_1_2, ElectronProjection::plus_3_2,
                                  ElectronProjection::minus_3_2}) {
      const double secular = std::abs(value(ms) * 8.660 + s.gamma_n * s.b_z);
      CHECK(std::abs(nuclear_transition_frequency(lv, ms) - secular) / secular < 0.01);
    }
    const double diff = nuclear_transition_frequency(lv, ElectronProjection::plus_3_2) -
                        nuclear_transition_frequency(lv, ElectronProjection::plus_1_2);
    CHECK(std::abs(diff - 8.660) / 8.660 < 0.01);
  }

  TEST_CASE("electron transitions") {
    SUBCASE("uncoupled nucleus: independent of mI") {
      SpinSystem s = table_system();
      s.hf_ground = {};
      const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
      const auto up = electron_transition_frequencies(lv, NuclearProjection::up);
      const auto down = electron_transition_frequencies(lv, NuclearProjection::down);
      CHECK(up.upper == doctest::Approx(down.upper).epsilon(1e-12));
      CHECK(up.lower == doctest::Approx(down.lower).epsilon(1e-12));
    }
    SUBCASE("D = 0, A = 0: both equal |gamma_e B|") {
      SpinSystem s = table_system();
      s.d_ground = 0.0;
      s.hf_ground = {};
      const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
      const auto f = electron_transition_frequencies(lv, NuclearProjection::up);
      CHECK(f.upper == doctest::Approx(s.gamma_e * s.b_z).epsilon(1e-12));
      CHECK(f.lower == doctest::Approx(s.gamma_e * s.b_z).epsilon(1e-12));
    }
    SUBCASE("Table tensor: mI branches differ by about A_par") {
      const EnergyLevels lv = eigen_levels(build_hamiltonian(table_system(), ElectronicState::ground));
      const auto up = electron_transition_frequencies(lv, NuclearProjection::up);
      const auto down = electron_transition_frequencies(lv, NuclearProjection::down);
      CHECK(std::abs(std::abs(up.upper - down.upper) - 8.660) / 8.660 < 0.01);
    }
    SUBCASE("monotone in field over [0.05, 1] T") {
      SpinSystem s = table_system();
      double prev_upper = -1e300, prev_lower = -1e300;
      for (double b = 0.05; b <= 1.0; b += 0.05) {
        s.b_z = b;
        const auto f = electron_transition_frequencies(eigen_levels(build_hamiltonian(s, ElectronicState::ground)),
                                                       NuclearProjection::up);
        CHECK(f.upper > prev_upper);
        CHECK(f.lower > prev_lower);
        prev_upper = f.upper;
        prev_lower = f.lower;
      }
    }
  }

  TEST_CASE("Larmor frequencies") {
    CHECK(larmor_frequency(NuclearSpecies::si29, 0.0) == 0.0);
    CHECK(larmor_frequency(NuclearSpecies::si29, 0.14) == doctest::Approx(1.185).epsilon(1e-3));
    CHECK(larmor_frequency(NuclearSpecies::c13, 0.14) == doctest::Approx(1.499).epsilon(1e-3));
    CHECK_THROWS_AS(parse_species("N15"), InvalidParameter);
    CHECK_THROWS_AS(larmor_frequency(NuclearSpecies::c13, -1.0), InvalidParameter);
  }

  TEST_CASE("invalid inputs") {
    SpinSystem s = table_system();
    s.b_z = -0.1;
    CHECK_THROWS_AS(build_hamiltonian(s, ElectronicState::ground), InvalidParameter);
    s = table_system();
    s.d_ground = std::nan("");
    CHECK_THROWS_AS(build_hamiltonian(s, ElectronicState::ground), InvalidParameter);
  }

  TEST_CASE("excited state falls back to the ground tensor") {
    const SpinSystem s = table_system();
    CHECK(&s.hyperfine(ElectronicState::excited) == &s.hf_ground);
    CHECK(s.hf_ground.a_iso() == doctest::Approx((9.00 + 9.03 + 8.660) / 3.0).epsilon(1e-12));
  }

  TEST_CASE("ambiguous labels raise a labeling error") {
    SpinSystem s;
    s.hf_ground = {5.0, 5.0, 0.0};  // zero field, strong transverse mixing
    const EnergyLevels lv = eigen_levels(build_hamiltonian(s, ElectronicState::ground));
    CHECK_FALSE(lv.high_field_labels());
    CHECK_THROWS_AS(nuclear_transition_frequency(lv, ElectronProjection::plus_1_2), LabelingError);
  }
}
