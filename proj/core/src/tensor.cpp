#include "symflow/tensor.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace symflow::qform {

const TripleIndex& triple_index(int dim) {
  static std::mutex mu;
  static std::map<int, TripleIndex> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(dim);
  if (it == cache.end()) it = cache.emplace(dim, TripleIndex(dim)).first;
  return it->second;
}

TripleIndex::TripleIndex(int dim) : d_(dim) {
  if (dim < 1) throw std::invalid_argument("TripleIndex: dimension must be positive");
  triples_.reserve(static_cast<size_t>(dim) * (dim + 1) * (dim + 2) / 6);
  lookup_.assign(static_cast<size_t>(dim) * dim * dim, -1);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      for (int k = j; k < dim; ++k) {
        lookup_[(static_cast<size_t>(i) * dim + j) * dim + k] =
            static_cast<int>(triples_.size());
        triples_.push_back({i, j, k});
      }
}

int TripleIndex::index(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= d_ || j >= d_ || k >= d_)
    throw std::invalid_argument("TripleIndex: index out of range");
  if (i > j) std::swap(i, j);
  if (j > k) std::swap(j, k);
  if (i > j) std::swap(i, j);
  return lookup_[(static_cast<size_t>(i) * d_ + j) * d_ + k];
}

int TripleIndex::multiplicity(const std::array<int, 3>& t) {
  if (t[0] == t[2]) return 1;
  if (t[0] == t[1] || t[1] == t[2]) return 3;
  return 6;
}

SymTensor3::SymTensor3(int n_) : n(n_) {
  if (n_ < 1) throw std::invalid_argument("SymTensor3: n must be positive");
  const int d = 2 * n_;
  c = Eigen::VectorXd::Zero(d * (d + 1) * (d + 2) / 6);
}

double SymTensor3::get(int i, int j, int k) const {
  return c[triple_index(2 * n).index(i, j, k)];
}

void SymTensor3::set(int i, int j, int k, double v) {
  c[triple_index(2 * n).index(i, j, k)] = v;
}

}  // namespace symflow::qform
