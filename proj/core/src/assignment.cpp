#include "tempfid/assignment.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "tempfid/errors.hpp"

namespace tempfid {

CostMatrix::CostMatrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : n_(rows), data_(std::move(values)) {
  if (rows != cols) {
    throw DataError(fmt::format("cost matrix must be square, got {} x {}", rows, cols));
  }
  if (data_.size() != rows * cols) throw DataError("cost matrix data size mismatch");
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> data;
  data.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) {
      throw DataError(fmt::format("cost matrix must be square, got a row of {} in {} rows",
                                  r.size(), n));
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return CostMatrix(n, n, std::move(data));
}

void CostMatrix::validate() const {
  for (const double c : data_) {
    if (!std::isfinite(c)) throw DataError("cost matrix has a non-finite entry");
    if (c < 0.0) throw DataError("cost matrix has a negative entry");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::ptrdiff_t kFree = -1;

class JonkerVolgenant {
 public:
  explicit JonkerVolgenant(const CostMatrix& c)
      : c_(c), n_(c.size()), x_(n_, kFree), y_(n_, kFree), v_(n_, kInf) {}

  Assignment run() {
    std::vector<std::size_t> free_rows = column_reduction();
    for (int round = 0; round < 2 && !free_rows.empty(); ++round) {
      free_rows = augmenting_row_reduction(free_rows);
    }
    std::vector<std::size_t> pred(n_);
    for (const std::size_t f : free_rows) augment(f, pred);

    Assignment out;
    out.column_of_row.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      out.column_of_row[i] = static_cast<std::size_t>(x_[i]);
      out.total_cost += c_(i, out.column_of_row[i]);
    }
    return out;
  }

 private:
  // Column reduction and reduction transfer. Returns rows left unassigned.
  std::vector<std::size_t> column_reduction() {
    std::vector<std::size_t> col_min_row(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto row = c_.row(i);
      for (std::size_t j = 0; j < n_; ++j) {
        if (row[j] < v_[j]) {
          v_[j] = row[j];
          col_min_row[j] = i;
        }
      }
    }
    std::vector<bool> unique(n_, true);
    for (std::size_t j = n_; j-- > 0;) {
      const std::size_t i = col_min_row[j];
      if (x_[i] == kFree) {
        x_[i] = static_cast<std::ptrdiff_t>(j);
        y_[j] = static_cast<std::ptrdiff_t>(i);
      } else {
        unique[i] = false;
      }
    }
    std::vector<std::size_t> free_rows;
    for (std::size_t i = 0; i < n_; ++i) {
      if (x_[i] == kFree) {
        free_rows.push_back(i);
      } else if (unique[i]) {
        const auto j = static_cast<std::size_t>(x_[i]);
        double min_reduced = kInf;
        const auto row = c_.row(i);
        for (std::size_t j2 = 0; j2 < n_; ++j2) {
          if (j2 != j) min_reduced = std::min(min_reduced, row[j2] - v_[j2]);
        }
        if (min_reduced < kInf) v_[j] -= min_reduced;
      }
    }
    return free_rows;
  }

  std::vector<std::size_t> augmenting_row_reduction(std::vector<std::size_t> free_rows) {
    std::size_t current = 0;
    std::size_t next_free = 0;
    std::size_t iterations = 0;
    const std::size_t count = free_rows.size();
    // free_rows is consumed from the front and may be pushed back onto.
    while (current < count) {
      ++iterations;
      const std::size_t i = free_rows[current++];
      const auto row = c_.row(i);
      std::size_t j1 = 0;
      double u1 = row[0] - v_[0];
      std::ptrdiff_t j2 = -1;
      double u2 = kInf;
      for (std::size_t j = 1; j < n_; ++j) {
        const double h = row[j] - v_[j];
        if (h < u2) {
          if (h >= u1) {
            u2 = h;
            j2 = static_cast<std::ptrdiff_t>(j);
          } else {
            u2 = u1;
            u1 = h;
            j2 = static_cast<std::ptrdiff_t>(j1);
            j1 = j;
          }
        }
      }
      std::ptrdiff_t i0 = y_[j1];
      const double lowered = v_[j1] - (u2 - u1);
      const bool lowers = lowered < v_[j1];
      if (iterations < current * n_) {
        if (lowers) {
          v_[j1] = lowered;
        } else if (i0 != kFree && j2 >= 0) {
          j1 = static_cast<std::size_t>(j2);
          i0 = y_[j1];
        }
        if (i0 != kFree) {
          if (lowers) {
            free_rows[--current] = static_cast<std::size_t>(i0);
          } else {
            free_rows[next_free++] = static_cast<std::size_t>(i0);
          }
        }
      } else if (i0 != kFree) {
        free_rows[next_free++] = static_cast<std::size_t>(i0);
      }
      x_[i] = static_cast<std::ptrdiff_t>(j1);
      y_[j1] = static_cast<std::ptrdiff_t>(i);
    }
    free_rows.resize(next_free);
    return free_rows;
  }

  // Shortest augmenting path from a free row; updates prices and matching.
  void augment(std::size_t start, std::vector<std::size_t>& pred) {
    std::vector<std::size_t> cols(n_);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::vector<double> d(n_);
    const auto start_row = c_.row(start);
    for (std::size_t j = 0; j < n_; ++j) {
      pred[j] = start;
      d[j] = start_row[j] - v_[j];
    }
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t ready = 0;
    std::ptrdiff_t end = -1;
    while (end < 0) {
      if (lo == hi) {
        ready = lo;
        hi = collect_minimum(lo, d, cols);
        for (std::size_t k = lo; k < hi; ++k) {
          if (y_[cols[k]] == kFree) {
            end = static_cast<std::ptrdiff_t>(cols[k]);
            break;
          }
        }
      }
      if (end < 0) end = scan(lo, hi, d, cols, pred);
    }
    const double min_d = d[cols[lo]];
    for (std::size_t k = 0; k < ready; ++k) {
      const std::size_t j = cols[k];
      v_[j] += d[j] - min_d;
    }
    auto j = static_cast<std::size_t>(end);
    std::size_t i = n_;
    while (i != start) {
      i = pred[j];
      y_[j] = static_cast<std::ptrdiff_t>(i);
      const auto previous = static_cast<std::size_t>(x_[i]);
      x_[i] = static_cast<std::ptrdiff_t>(j);
      j = previous;
    }
  }

  // Moves every column with minimal d among cols[lo..] to cols[lo..hi).
  std::size_t collect_minimum(std::size_t lo, const std::vector<double>& d,
                              std::vector<std::size_t>& cols) const {
    std::size_t hi = lo + 1;
    double min_d = d[cols[lo]];
    for (std::size_t k = hi; k < n_; ++k) {
      const std::size_t j = cols[k];
      if (d[j] <= min_d) {
        if (d[j] < min_d) {
          hi = lo;
          min_d = d[j];
        }
        cols[k] = cols[hi];
        cols[hi++] = j;
      }
    }
    return hi;
  }

  std::ptrdiff_t scan(std::size_t& lo, std::size_t& hi, std::vector<double>& d,
                      std::vector<std::size_t>& cols, std::vector<std::size_t>& pred) const {
    while (lo != hi) {
      std::size_t j = cols[lo++];
      const auto i = static_cast<std::size_t>(y_[j]);
      const double min_d = d[j];
      const auto row = c_.row(i);
      const double h = row[j] - v_[j] - min_d;
      for (std::size_t k = hi; k < n_; ++k) {
        j = cols[k];
        const double reduced = row[j] - v_[j] - h;
        if (reduced < d[j]) {
          d[j] = reduced;
          pred[j] = i;
          if (reduced == min_d) {
            if (y_[j] == kFree) return static_cast<std::ptrdiff_t>(j);
            cols[k] = cols[hi];
            cols[hi++] = j;
          }
        }
      }
    }
    return -1;
  }

  const CostMatrix& c_;
  std::size_t n_;
  std::vector<std::ptrdiff_t> x_;  // column of row
  std::vector<std::ptrdiff_t> y_;  // row of column
  std::vector<double> v_;          // column prices
};

}  // namespace

Assignment solve_assignment(const CostMatrix& cost) {
  cost.validate();
  if (cost.size() == 0) return {};
  if (cost.size() == 1) return {{0}, cost(0, 0)};
  return JonkerVolgenant(cost).run();
}

}  // namespace tempfid
