#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tempfid {

/// Square matrix of finite non-negative costs, row-major.
class CostMatrix {
 public:
  explicit CostMatrix(std::size_t n, double fill = 0.0);

  /// Throws DataError unless rows == cols.
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * n_, n_);
  }

  /// Throws DataError on a non-finite or negative entry.
  void validate() const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<std::size_t> column_of_row;
  double total_cost = 0.0;
};

/// Exact minimum-cost perfect matching, O(n^3) worst case.
///
/// Jonker-Volgenant shortest augmenting path: column reduction with
/// reduction transfer, two rounds of augmenting row reduction, then
/// Dijkstra-style augmentation for the remaining free rows. Deterministic;
/// equal-cost candidates resolve toward the lowest row/column index during
/// the reduction phase.
Assignment solve_assignment(const CostMatrix& cost);

}  // namespace tempfid
