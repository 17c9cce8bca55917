// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leftnet/geometry.hpp"
#include "leftnet/graph.hpp"

namespace leftnet {

/// Atomic number for a symbol (case-sensitive, "H" .. "Og"). Throws UnknownElement.
int atomic_number(std::string_view symbol);
/// Symbol for 1..118. Throws UnknownElement.
std::string_view element_symbol(int z);

/// One frame of a multi-frame XYZ file. `energy` comes from an "energy=<x>"
/// token in the comment line; forces from three optional extra columns.
struct XyzFrame {
  std::string comment;
  std::vector<int> atomic_numbers;
  std::vector<Vec3> positions;
  std::optional<double> energy;
  std::optional<std::vector<Vec3>> forces;

  std::size_t size() const { return positions.size(); }
};

std::vector<XyzFrame> parse_xyz(std::string_view text);
std::vector<XyzFrame> read_xyz_file(const std::string& path);

/// Numbers are written with 17 significant digits so that parsing restores
/// them exactly. An energy, if present, is written into the comment line
/// (replacing any existing energy= token).
std::string write_xyz(const std::vector<XyzFrame>& frames);
void write_xyz_file(const std::string& path, const std::vector<XyzFrame>& frames);

GeometricGraph to_graph(const XyzFrame& frame, double cutoff);

}  // namespace leftnet
