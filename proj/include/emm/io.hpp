#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "emm/grid.hpp"

namespace emm {

/// EMMF v1 text format: header lines `EMMF 1`, `n p`, shape, origin,
/// spacing, then one node per line in row-major order (p reals or `X` for an
/// excluded node), 17 significant digits.
void write_emmf(std::ostream& os, const GridField& field);

/// When `constraint` is empty a field with p >= 2 whose unmasked values are
/// all unit vectors (to 1e-12) is read as sphere-valued.
GridField read_emmf(std::istream& is, std::optional<Constraint> constraint = std::nullopt);

void save_emmf(const std::filesystem::path& path, const GridField& field);
GridField load_emmf(const std::filesystem::path& path, std::optional<Constraint> constraint = std::nullopt);

/// Shortest decimal text with 17 significant digits.
std::string format_real(double v);

}  // namespace emm
