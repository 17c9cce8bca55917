// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include "leftnet/geometry.hpp"

namespace leftnet::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Frame random_frame(std::mt19937_64& rng) {
  for (;;) {
    auto f = try_gram_schmidt(random_vec(rng), random_vec(rng));
    if (f) return *f;
  }
}

inline Mat3 random_mat(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  for (auto& x : m.m) x = u(rng);
  return m;
}

}  // namespace leftnet::testing
