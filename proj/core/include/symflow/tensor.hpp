#pragma once

// Fully symmetric 3-tensors over R^{2n}, stored by canonical index triples
// i <= j <= k. The canonical coordinate count is (2n)(2n+1)(2n+2)/6.

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace symflow::qform {

class TripleIndex {
 public:
  explicit TripleIndex(int dim);

  int dim() const { return d_; }
  int count() const { return static_cast<int>(triples_.size()); }

  // Canonical position of the unordered triple {i,j,k}; indices are sorted
  // internally.
  int index(int i, int j, int k) const;

  const std::array<int, 3>& triple(int a) const { return triples_[a]; }

  // Number of ordered placements: 1, 3 or 6.
  static int multiplicity(const std::array<int, 3>& t);

 private:
  int d_;
  std::vector<std::array<int, 3>> triples_;
  std::vector<int> lookup_;  // dense d^3 table
};

// Shared per-dimension instance; thread-safe.
const TripleIndex& triple_index(int dim);

struct SymTensor3 {
  int n = 0;
  Eigen::VectorXd c;  // canonical coordinates, TripleIndex(2n) order

  SymTensor3() = default;
  explicit SymTensor3(int n_);

  double get(int i, int j, int k) const;
  void set(int i, int j, int k, double v);
};

}  // namespace symflow::qform
