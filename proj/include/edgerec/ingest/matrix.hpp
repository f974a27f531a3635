#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgerec/ingest/dataset.hpp"
#include "edgerec/xform/scaler.hpp"

namespace edgerec::ingest {

/// Row-major real matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  /// Rows selected by `index`, in that order.
  DenseMatrix select_rows(const std::vector<std::size_t>& index) const;

  bool operator==(const DenseMatrix&) const = default;
};

/// Users x items array of scaled strengths. Unknown cells hold exactly 0.0
/// and a zero mask byte.
struct InteractionMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> known;
  std::vector<std::size_t> row_ids;  // matrix row -> dataset user index
  std::vector<std::size_t> col_ids;  // matrix column -> dataset item index

  double value(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool is_known(std::size_t r, std::size_t c) const { return known[r * cols + c] != 0; }
  std::size_t known_count() const;
  double density() const;
};

/// n x m sub-matrix; `user_rows` / `item_cols` index rows / columns of the parent.
struct Patch {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> known;
  std::vector<std::size_t> user_rows;
  std::vector<std::size_t> item_cols;

  double density() const;
};

InteractionMatrix build_matrix(const RatingDataset& train, const xform::RatingScaler& scaler);

/// Extracts the sub-matrix at the given parent rows and columns.
Patch extract_patch(const InteractionMatrix& matrix, std::vector<std::size_t> rows,
                    std::vector<std::size_t> cols);

/// Reorders rows then columns: result row r is input row row_order[r].
InteractionMatrix permute_matrix(const InteractionMatrix& matrix,
                                 const std::vector<std::size_t>& row_order,
                                 const std::vector<std::size_t>& col_order);

}  // namespace edgerec::ingest
