#pragma once

// Test-only reference implementations. None of these share code paths with
// the library routines they check.

#include <cstdint>
#include <vector>

#include "repread/fidelity.hpp"
#include "repread/histogram.hpp"
#include "repread/readout.hpp"
#include "repread/spin_model.hpp"
#include "repread/trajectory.hpp"

namespace oracle {

/// Hamiltonian assembled from explicit spin matrices and Kronecker products.
repread::HamiltonianMatrix kron_hamiltonian(const repread::SpinSystem &sys, repread::ElectronicState state);

/// Cyclic Jacobi rotations to convergence; ascending eigenvalues.
std::vector<double> jacobi_eigenvalues(const repread::HamiltonianMatrix &h);

/// Count pmf by enumerating all 2^N hidden paths (N <= 16); each path
/// contributes a Poisson with the summed emission mean.
repread::DiscretePmf enumerate_counts(const repread::ReadoutParams &params, repread::HiddenState initial,
                                      long n_max);

/// Same for the alternating readout (2 * n_pairs slots, n_pairs <= 8),
/// each path contributing a Skellam built by direct convolution.
repread::DiscretePmf enumerate_diff(const repread::ReadoutParams &base, long n_pairs, repread::HiddenState initial,
                                    long k_max);

/// Sum_j Pois(mu1, k + j) Pois(mu2, j), truncated where terms vanish.
double skellam_convolution(double mu1, double mu2, long k);

/// Per-repetition Monte Carlo: Poisson emission then a Bernoulli switch test.
repread::Histogram naive_counts(const repread::ReadoutParams &params, repread::HiddenState initial,
                                std::uint64_t trials, std::uint64_t seed);

/// Log marginal likelihood by summing over all 2^T hidden paths (T <= 16).
double brute_log_evidence(const repread::Trajectory &traj, const repread::ReadoutParams &params);

/// Points not dominated by any other point (eta >=, infidelity <=, one strict).
std::vector<repread::FidelityPoint> brute_pareto(const std::vector<repread::FidelityPoint> &points);

}  // namespace oracle
