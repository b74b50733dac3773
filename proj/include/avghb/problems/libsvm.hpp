#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <Eigen/SparseCore>

#include "avghb/problems/objective.hpp"

namespace avghb::problems {

// Compressed sparse row storage: Eigen row-major sparse matrix. Row i spans
// [outerIndexPtr()[i], outerIndexPtr()[i+1]) of innerIndexPtr() (0-based
// column indices, strictly ascending) and valuePtr(). Explicit zeros present
// in the input are kept.
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::ptrdiff_t>;

struct Dataset {
  SparseRowMatrix features;  // m x d
  Vector labels;             // m entries in {-1, +1}

  std::size_t samples() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t features_dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

// Reads `<label> <index>:<value> ...` lines with 1-based strictly ascending
// indices. Labels +1/1 map to +1, -1 and 0 map to -1; anything else is an
// error. Blank lines and lines starting with '#' are skipped. The feature
// count is the largest index seen unless `dim_override` is given (it must
// not be smaller). Errors carry the 1-based line number.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim_override = std::nullopt);
Dataset parse_libsvm(const std::filesystem::path& path,
                     std::optional<std::size_t> dim_override = std::nullopt);

// Writes every stored entry with 17 significant digits, so parsing the
// output reproduces structure and values exactly.
void write_libsvm(const Dataset& data, std::ostream& out);

}  // namespace avghb::problems
