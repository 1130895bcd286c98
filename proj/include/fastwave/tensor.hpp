#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fastwave/error.hpp"

namespace fastwave {

template <class T>
using Vector = std::vector<T>;

// Dense row-major matrix. Shape is fixed at construction.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      fail(ErrorCode::kShapeMismatch,
           "matrix data has " + std::to_string(data_.size()) + " elements, expected " +
               std::to_string(rows_ * cols_));
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<const T> flat() const noexcept { return data_; }
  std::span<T> flat() noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T, class F>
auto map_matrix(const Matrix<T>& m, F&& f) {
  using U = decltype(f(m.flat()[0]));
  std::vector<U> out;
  out.reserve(m.size());
  for (const T& v : m.flat()) out.push_back(f(v));
  return Matrix<U>(m.rows(), m.cols(), std::move(out));
}

inline void require_length(std::size_t actual, std::size_t expected, ErrorCode code,
                           const char* what) {
  if (actual != expected) {
    fail(code, std::string(what) + ": got length " + std::to_string(actual) + ", expected " +
                   std::to_string(expected));
  }
}

}  // namespace fastwave
