#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace dggan {

// Dense row-major double-precision tensor. Plain value semantics, CPU only.
// Heavy math lives in the nn ops (Eigen GEMM over raw pointers); this class
// only owns storage and indexing.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(count(shape_)), 0.0);
  }

  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    assert(static_cast<std::int64_t>(data_.size()) == count(shape_));
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(int i) {
    assert(ndim() == 1);
    return data_[static_cast<std::size_t>(i)];
  }
  double& at(int i, int j) {
    assert(ndim() == 2);
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double& at(int i, int j, int k) {
    assert(ndim() == 3);
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double& at(int i, int j, int k, int l) {
    assert(ndim() == 4);
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double& at(int i, int j, int k, int l, int m) {
    assert(ndim() == 5);
    return data_[(((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l) *
                     shape_[4] +
                 m];
  }
  double at(int i) const { return const_cast<Tensor*>(this)->at(i); }
  double at(int i, int j) const { return const_cast<Tensor*>(this)->at(i, j); }
  double at(int i, int j, int k) const { return const_cast<Tensor*>(this)->at(i, j, k); }
  double at(int i, int j, int k, int l) const { return const_cast<Tensor*>(this)->at(i, j, k, l); }
  double at(int i, int j, int k, int l, int m) const {
    return const_cast<Tensor*>(this)->at(i, j, k, l, m);
  }

  Tensor reshaped(std::vector<int> new_shape) const {
    assert(count(new_shape) == numel());
    return Tensor(std::move(new_shape), data_);
  }

  void fill(double v) {
    for (auto& x : data_) x = v;
  }
  void zero_() { fill(0.0); }

  double sum() const {
    double s = 0.0;
    for (double x : data_) s += x;
    return s;
  }
  double mean() const { return numel() > 0 ? sum() / static_cast<double>(numel()) : 0.0; }
  double min_value() const {
    assert(!data_.empty());
    double m = data_[0];
    for (double x : data_) m = x < m ? x : m;
    return m;
  }
  double max_value() const {
    assert(!data_.empty());
    double m = data_[0];
    for (double x : data_) m = x > m ? x : m;
    return m;
  }

  Tensor& operator+=(const Tensor& o) {
    assert(o.numel() == numel());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    assert(o.numel() == numel());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double c) {
    for (auto& x : data_) x *= c;
    return *this;
  }

  static std::int64_t count(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace dggan
