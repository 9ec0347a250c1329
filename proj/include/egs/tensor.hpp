#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace egs {

// Dense row-major f64 tensor. The policy only ever needs rank <= 2.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor matrix(std::size_t rows, std::size_t cols);
  static Tensor row(std::vector<double> values);
  static Tensor scalar(double v);

  std::size_t numel() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;
};

// Throws NumericError naming `op` if any entry is NaN or infinite.
void check_finite(const Tensor& t, const char* op);

// C = A*B, C += A*B^T style kernels; plain loops ordered for contiguous access.
void matmul_nn(const Tensor& a, const Tensor& b, Tensor& c);        // c  = a @ b
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);    // c += a @ b^T
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);    // c += a^T @ b

}  // namespace egs
