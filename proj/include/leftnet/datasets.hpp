// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic molecules and labelled datasets with closed-form energies.

#include <cstdint>
#include <string>
#include <vector>

#include "leftnet/io.hpp"

namespace leftnet {

/// Random connected molecule of `n` atoms: each atom is placed 1.0-1.6 A
/// from a randomly chosen earlier atom and at least 0.9 A from all others.
/// Elements are drawn from H, C, N, O.
XyzFrame random_molecule(int n, std::uint64_t seed);

inline constexpr double kCloudWidth = 8.0;

/// Random cloud at fixed number density (atoms per cubic A) with a minimum
/// separation of 0.8 A, used for scaling measurements. Atoms fill a rod of
/// fixed kCloudWidth x kCloudWidth cross-section whose length grows with n,
/// so the share of atoms near a surface, and with it the mean degree, does
/// not drift with n.
std::vector<Vec3> random_cloud(int n, double density, std::uint64_t seed);

/// Tetrahedral center with four distinct substituents, slightly distorted;
/// its mirror image is not superimposable.
XyzFrame chiral_probe();

struct LennardJones {
  double epsilon = 1.0;
  double sigma = 1.0;
};

struct Morse {
  double depth = 1.0;
  double width = 1.5;
};

/// Total pair energy and analytic forces.
double lennard_jones(const std::vector<Vec3>& x, const LennardJones& p, std::vector<Vec3>* forces);

/// Morse energy over all pairs with per-pair equilibrium distances r0[i][j].
double morse(const std::vector<Vec3>& x, const std::vector<std::vector<double>>& r0, const Morse& p,
             std::vector<Vec3>* forces);

/// Argon dimers with separations uniform in [0.95, 2.2] sigma, random
/// orientation and offset. Energies and forces labelled.
std::vector<XyzFrame> lj_dimer_dataset(int n, std::uint64_t seed);

/// Thermal-like samples of a fixed six-atom molecule: Gaussian displacements
/// (0.1 A) of the reference geometry under a Morse network whose equilibrium
/// distances are the reference distances. Random rigid motion per sample.
std::vector<XyzFrame> morse_cluster_dataset(int n, std::uint64_t seed);

/// Atom `a` bonded to `b` and `c`; `b` and `c` each carry two further atoms.
/// Node order: a, b, c, B1, B2, C1, C2.
struct TwoHopSample {
  XyzFrame frame;
  double target = 0.0;  // unit(B1 - b) . unit(C1 - c)
};

inline constexpr double kTwoHopCutoff = 1.8;

TwoHopSample two_hop_sample(std::uint64_t seed);
std::vector<XyzFrame> two_hop_dataset(int n, std::uint64_t seed);

/// Target of a two-hop geometry in node order a, b, c, B1, B2, C1, C2.
double two_hop_target(const std::vector<Vec3>& x);

/// Dispatches on "lj_dimer", "morse_cluster" or "two_hop_probe".
std::vector<XyzFrame> generate_dataset(const std::string& kind, int n, std::uint64_t seed);

}  // namespace leftnet
