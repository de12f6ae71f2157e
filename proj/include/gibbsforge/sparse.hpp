#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "gibbsforge/errors.hpp"

namespace gibbsforge {

/// Compressed sparse row matrix of doubles.
class SparseMatrix {
 public:
  using Entry = std::pair<std::size_t, double>;

  SparseMatrix() = default;

  /// Build from per-row (column, value) lists; duplicate columns are summed
  /// and explicit zeros dropped.
  SparseMatrix(std::size_t cols, std::vector<std::vector<Entry>> rows) : cols_(cols) {
    ptr_.reserve(rows.size() + 1);
    ptr_.push_back(0);
    for (auto& row : rows) {
      std::sort(row.begin(), row.end(),
                [](const Entry& a, const Entry& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < row.size();) {
        std::size_t c = row[k].first;
        if (c >= cols) throw Error(ErrorKind::invalid_parameter, "column index out of range");
        double v = 0.0;
        while (k < row.size() && row[k].first == c) v += row[k++].second;
        if (v != 0.0) {
          idx_.push_back(c);
          val_.push_back(v);
        }
      }
      ptr_.push_back(idx_.size());
    }
  }

  std::size_t rows() const { return ptr_.empty() ? 0 : ptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return val_.size(); }

  std::size_t row_begin(std::size_t i) const { return ptr_[i]; }
  std::size_t row_end(std::size_t i) const { return ptr_[i + 1]; }
  std::size_t col(std::size_t k) const { return idx_[k]; }
  double value(std::size_t k) const { return val_[k]; }

  double at(std::size_t i, std::size_t j) const {
    for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) {
      if (idx_[k] == j) return val_[k];
    }
    return 0.0;
  }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) s += val_[k];
    return s;
  }

  /// A x
  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(rows(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
      double s = 0.0;
      for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) s += val_[k] * x[idx_[k]];
      y[i] = s;
    }
    return y;
  }

  /// y^T A
  std::vector<double> left_multiply(const std::vector<double>& y) const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
      const double yi = y[i];
      if (yi == 0.0) continue;
      for (std::size_t k = ptr_[i]; k < ptr_[i + 1]; ++k) x[idx_[k]] += yi * val_[k];
    }
    return x;
  }

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> ptr_;
  std::vector<std::size_t> idx_;
  std::vector<double> val_;
};

/// A B for sparse A (n x m) and B (m x p).
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::invalid_parameter, "matrix shapes do not match");
  std::vector<std::vector<SparseMatrix::Entry>> rows(a.rows());
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<char> used(b.cols(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    touched.clear();
    for (std::size_t ka = a.row_begin(i); ka < a.row_end(i); ++ka) {
      const std::size_t m = a.col(ka);
      const double va = a.value(ka);
      for (std::size_t kb = b.row_begin(m); kb < b.row_end(m); ++kb) {
        const std::size_t j = b.col(kb);
        if (!used[j]) {
          used[j] = 1;
          touched.push_back(j);
        }
        acc[j] += va * b.value(kb);
      }
    }
    rows[i].reserve(touched.size());
    for (std::size_t j : touched) {
      rows[i].emplace_back(j, acc[j]);
      acc[j] = 0.0;
      used[j] = 0;
    }
  }
  return SparseMatrix(b.cols(), std::move(rows));
}

}  // namespace gibbsforge
