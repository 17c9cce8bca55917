// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace leftnet {
namespace {

constexpr std::array<std::string_view, 118> kSymbols = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

double parse_real(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("expected a finite number, got '" + std::string(token) + "'", line);
  }
  return value;
}

std::optional<double> energy_from_comment(std::string_view comment, std::size_t line) {
  for (const auto token : split_ws(comment)) {
    if (token.substr(0, 7) == "energy=") return parse_real(token.substr(7), line);
  }
  return std::nullopt;
}

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                       std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

}  // namespace

int atomic_number(std::string_view symbol) {
  for (std::size_t k = 0; k < kSymbols.size(); ++k) {
    if (kSymbols[k] == symbol) return static_cast<int>(k) + 1;
  }
  throw UnknownElement("unknown element symbol '" + std::string(symbol) + "'");
}

std::string_view element_symbol(int z) {
  if (z < 1 || z > 118) throw UnknownElement("no element with atomic number " + std::to_string(z));
  return kSymbols[static_cast<std::size_t>(z - 1)];
}

std::vector<XyzFrame> parse_xyz(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }

  std::vector<XyzFrame> frames;
  std::size_t k = 0;
  while (k < lines.size()) {
    const auto header = split_ws(lines[k]);
    if (header.empty()) {
      ++k;
      continue;
    }
    const std::size_t header_line = k + 1;
    if (header.size() != 1) throw ParseError("expected an atom count", header_line);
    std::size_t count = 0;
    const auto [ptr, ec] =
        std::from_chars(header[0].data(), header[0].data() + header[0].size(), count);
    if (ec != std::errc() || ptr != header[0].data() + header[0].size()) {
      throw ParseError("expected an atom count, got '" + std::string(header[0]) + "'", header_line);
    }
    if (k + 1 >= lines.size()) throw ParseError("missing comment line", header_line + 1);
    XyzFrame frame;
    frame.comment = std::string(lines[k + 1]);
    frame.energy = energy_from_comment(lines[k + 1], header_line + 1);
    std::vector<Vec3> forces;
    bool has_forces = false;
    for (std::size_t a = 0; a < count; ++a) {
      const std::size_t idx = k + 2 + a;
      const std::size_t line_no = idx + 1;
      if (idx >= lines.size()) {
        throw ParseError("atom count " + std::to_string(count) + " exceeds the " +
                             std::to_string(a) + " atom lines present",
                         line_no);
      }
      const auto tok = split_ws(lines[idx]);
      if (tok.size() != 4 && tok.size() != 7) {
        throw ParseError("expected 'symbol x y z' with optional 'fx fy fz', got " +
                             std::to_string(tok.size()) + " fields",
                         line_no);
      }
      if (a == 0) {
        has_forces = tok.size() == 7;
      } else if (has_forces != (tok.size() == 7)) {
        throw ParseError("force columns must be present on every atom line or none", line_no);
      }
      frame.atomic_numbers.push_back(atomic_number(tok[0]));
      frame.positions.push_back(
          {parse_real(tok[1], line_no), parse_real(tok[2], line_no), parse_real(tok[3], line_no)});
      if (has_forces) {
        forces.push_back(
            {parse_real(tok[4], line_no), parse_real(tok[5], line_no), parse_real(tok[6], line_no)});
      }
    }
    if (has_forces) frame.forces = std::move(forces);
    k += 2 + count;
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<XyzFrame> read_xyz_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_xyz(ss.str());
}

std::string write_xyz(const std::vector<XyzFrame>& frames) {
  std::string out;
  for (const auto& f : frames) {
    if (f.atomic_numbers.size() != f.positions.size() || (f.forces && f.forces->size() != f.positions.size())) {
      throw std::invalid_argument("write_xyz: inconsistent frame");
    }
    out += std::to_string(f.positions.size()) + "\n";
    std::string comment;
    for (const auto token : split_ws(f.comment)) {
      if (token.substr(0, 7) == "energy=") continue;
      if (!comment.empty()) comment += ' ';
      comment += token;
    }
    if (f.energy) {
      if (!comment.empty()) comment += ' ';
      comment += "energy=" + format_real(*f.energy);
    }
    out += comment + "\n";
    for (std::size_t a = 0; a < f.positions.size(); ++a) {
      const Vec3& p = f.positions[a];
      out += std::string(element_symbol(f.atomic_numbers[a])) + ' ' + format_real(p.x) + ' ' +
             format_real(p.y) + ' ' + format_real(p.z);
      if (f.forces) {
        const Vec3& q = (*f.forces)[a];
        out += ' ' + format_real(q.x) + ' ' + format_real(q.y) + ' ' + format_real(q.z);
      }
      out += '\n';
    }
  }
  return out;
}

void write_xyz_file(const std::string& path, const std::vector<XyzFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << write_xyz(frames);
}

GeometricGraph to_graph(const XyzFrame& frame, double cutoff) {
  return build_radius_graph(frame.positions, cutoff, frame.atomic_numbers);
}

}  // namespace leftnet
