#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ilash {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(count_of(shape)), 0.0);
  }

  static std::int64_t count_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t count() const { return static_cast<std::int64_t>(data.size()); }
  int dim(std::size_t i) const { return shape.at(i); }

  // Rows along the leading axis.
  std::int64_t row_size() const {
    if (shape.empty()) throw std::logic_error("tensor: no leading axis");
    return shape[0] == 0 ? 0 : count() / shape[0];
  }
};

// New tensor holding the selected leading-axis rows, in the given order.
Tensor gather_rows(const Tensor& t, const std::vector<int>& rows);

}  // namespace ilash
