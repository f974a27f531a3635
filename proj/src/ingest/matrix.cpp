#include "edgerec/ingest/matrix.hpp"

#include <algorithm>

#include "edgerec/common/error.hpp"

namespace edgerec::ingest {

DenseMatrix DenseMatrix::select_rows(const std::vector<std::size_t>& index) const {
  DenseMatrix out(index.size(), cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= rows) throw ShapeError("select_rows: row index out of range");
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(index[r] * cols), cols,
                out.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return out;
}

std::size_t InteractionMatrix::known_count() const {
  return static_cast<std::size_t>(std::count_if(known.begin(), known.end(), [](auto k) { return k != 0; }));
}

double InteractionMatrix::density() const {
  return known.empty() ? 0.0 : static_cast<double>(known_count()) / static_cast<double>(known.size());
}

double Patch::density() const {
  if (known.empty()) return 0.0;
  auto count = std::count_if(known.begin(), known.end(), [](auto k) { return k != 0; });
  return static_cast<double>(count) / static_cast<double>(known.size());
}

InteractionMatrix build_matrix(const RatingDataset& train, const xform::RatingScaler& scaler) {
  InteractionMatrix mat;
  mat.rows = train.num_users;
  mat.cols = train.num_items;
  mat.values.assign(mat.rows * mat.cols, 0.0);
  mat.known.assign(mat.rows * mat.cols, 0);
  mat.row_ids.resize(mat.rows);
  mat.col_ids.resize(mat.cols);
  for (std::size_t r = 0; r < mat.rows; ++r) mat.row_ids[r] = r;
  for (std::size_t c = 0; c < mat.cols; ++c) mat.col_ids[c] = c;
  for (const auto& rec : train.records) {
    if (rec.user_id >= mat.rows || rec.item_id >= mat.cols) {
      throw IntegrityError("record id outside the dataset's declared counts");
    }
    std::size_t idx = rec.user_id * mat.cols + rec.item_id;
    mat.values[idx] = scaler.scale(rec.rating);
    mat.known[idx] = 1;
  }
  return mat;
}

Patch extract_patch(const InteractionMatrix& matrix, std::vector<std::size_t> rows,
                    std::vector<std::size_t> cols) {
  if (rows.empty() || cols.empty()) throw ShapeError("patch dimensions must be at least 1");
  Patch p;
  p.n = rows.size();
  p.m = cols.size();
  p.values.resize(p.n * p.m);
  p.known.resize(p.n * p.m);
  for (std::size_t i = 0; i < p.n; ++i) {
    if (rows[i] >= matrix.rows) throw ShapeError("patch row outside the matrix");
    for (std::size_t j = 0; j < p.m; ++j) {
      if (cols[j] >= matrix.cols) throw ShapeError("patch column outside the matrix");
      std::size_t src = rows[i] * matrix.cols + cols[j];
      p.values[i * p.m + j] = matrix.values[src];
      p.known[i * p.m + j] = matrix.known[src];
    }
  }
  p.user_rows = std::move(rows);
  p.item_cols = std::move(cols);
  return p;
}

InteractionMatrix permute_matrix(const InteractionMatrix& matrix,
                                 const std::vector<std::size_t>& row_order,
                                 const std::vector<std::size_t>& col_order) {
  if (row_order.size() != matrix.rows || col_order.size() != matrix.cols) {
    throw ShapeError("permute_matrix: order length mismatch");
  }
  InteractionMatrix out;
  out.rows = matrix.rows;
  out.cols = matrix.cols;
  out.values.resize(matrix.values.size());
  out.known.resize(matrix.known.size());
  out.row_ids.resize(out.rows);
  out.col_ids.resize(out.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    out.row_ids[r] = matrix.row_ids[row_order[r]];
    for (std::size_t c = 0; c < out.cols; ++c) {
      std::size_t src = row_order[r] * matrix.cols + col_order[c];
      out.values[r * out.cols + c] = matrix.values[src];
      out.known[r * out.cols + c] = matrix.known[src];
    }
  }
  for (std::size_t c = 0; c < out.cols; ++c) out.col_ids[c] = matrix.col_ids[col_order[c]];
  return out;
}

}  // namespace edgerec::ingest
