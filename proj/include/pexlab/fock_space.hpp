#ifndef PEXLAB_FOCK_SPACE_HPP
#define PEXLAB_FOCK_SPACE_HPP

// Truncated bosonic Fock space over M modes with total-particle cutoff n_max.
// Basis order is graded (total particles ascending) and, within a grade,
// lexicographically descending in the occupation tuple, so the vacuum sits at
// index 0 and every particle-number sector is a contiguous index range.
// Operators use hard truncation: a creation that exceeds n_max maps to zero,
// which keeps truncated generators exactly hermitian/skew-hermitian.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pexlab/core.hpp"

namespace pexlab {

class FockSpace {
 public:
  static constexpr int kMaxModes = 8;  // occupations are packed 8 bits/mode

  FockSpace(int M, int n_max, std::int64_t dim_budget = 2'000'000)
      : M_(M), n_max_(n_max) {
    require(M >= 1 && M <= kMaxModes, "FockSpace: need 1 <= M <= 8");
    require(n_max >= 0 && n_max <= 255, "FockSpace: need 0 <= n_max <= 255");
    std::int64_t d = dimension_of(M, n_max);
    require(d <= dim_budget, "FockSpace: dimension " + std::to_string(d) +
                                 " exceeds budget " + std::to_string(dim_budget));
    occ_.reserve(d);
    total_.reserve(d);
    grade_begin_.assign(n_max + 2, 0);
    std::vector<int> state(M, 0);
    for (int n = 0; n <= n_max; ++n) {
      grade_begin_[n] = (std::int64_t)occ_.size();
      enumerate_grade(n, 0, state);
    }
    grade_begin_[n_max + 1] = (std::int64_t)occ_.size();

    index_.reserve(occ_.size() * 2);
    for (std::int32_t s = 0; s < (std::int32_t)occ_.size(); ++s)
      index_.emplace(occ_[s], s);

    up_.assign(size_t(M) * occ_.size(), -1);
    dn_.assign(size_t(M) * occ_.size(), -1);
    for (std::int32_t s = 0; s < (std::int32_t)occ_.size(); ++s) {
      for (int i = 0; i < M; ++i) {
        int ni = occupation(s, i);
        if (ni > 0) dn_[size_t(i) * occ_.size() + s] = lookup(occ_[s] - bit(i));
        if (total_[s] < n_max)
          up_[size_t(i) * occ_.size() + s] = lookup(occ_[s] + bit(i));
      }
    }
    sqrt_.resize(n_max + 2);
    for (int n = 0; n <= n_max + 1; ++n) sqrt_[n] = std::sqrt(double(n));
  }

  static std::int64_t dimension_of(int M, int n_max) {
    // C(n_max + M, M)
    std::int64_t r = 1;
    for (int i = 1; i <= M; ++i) {
      r = r * (n_max + i) / i;  // exact: product of i consecutive ints / i!
      if (r < 0 || r > (std::int64_t)1 << 40) return (std::int64_t)1 << 40;
    }
    return r;
  }

  int modes() const { return M_; }
  int n_max() const { return n_max_; }
  std::int64_t dim() const { return (std::int64_t)occ_.size(); }

  int occupation(std::int32_t s, int mode) const {
    return int((occ_[s] >> (8 * mode)) & 0xffu);
  }
  int total(std::int32_t s) const { return total_[s]; }
  std::uint64_t packed(std::int32_t s) const { return occ_[s]; }

  std::int32_t index_of(const std::vector<int>& occ) const {
    require((int)occ.size() == M_, "index_of: wrong mode count");
    std::uint64_t key = 0;
    int tot = 0;
    for (int i = 0; i < M_; ++i) {
      require(occ[i] >= 0, "index_of: negative occupation");
      tot += occ[i];
      key |= (std::uint64_t)occ[i] << (8 * i);
    }
    require(tot <= n_max_, "index_of: state above cutoff");
    return index_.at(key);
  }
  std::vector<int> occupations(std::int32_t s) const {
    std::vector<int> o(M_);
    for (int i = 0; i < M_; ++i) o[i] = occupation(s, i);
    return o;
  }

  // -1 when the move leaves the truncated space
  std::int32_t up(int mode, std::int32_t s) const {
    return up_[size_t(mode) * occ_.size() + s];
  }
  std::int32_t down(int mode, std::int32_t s) const {
    return dn_[size_t(mode) * occ_.size() + s];
  }
  double sqrt_int(int n) const { return sqrt_[n]; }

  // Contiguous index range [first, last) of the n-particle sector.
  std::pair<std::int64_t, std::int64_t> grade_range(int n) const {
    return {grade_begin_[n], grade_begin_[n + 1]};
  }

  Vec vacuum() const {
    Vec v = Vec::Zero(dim());
    v[0] = 1.0;
    return v;
  }

  // Squared norm beyond total occupation `from_grade` (inclusive).
  double tail_mass(const Vec& psi, int from_grade) const {
    if (from_grade > n_max_) return 0.0;
    if (from_grade < 0) from_grade = 0;
    std::int64_t b = grade_begin_[from_grade];
    return psi.segment(b, dim() - b).squaredNorm();
  }

  // Occupation-number distribution P(n) = |sector-n component|^2.
  RVec number_distribution(const Vec& psi) const {
    RVec p = RVec::Zero(n_max_ + 1);
    for (int n = 0; n <= n_max_; ++n) {
      auto [b, e] = grade_range(n);
      p[n] = psi.segment(b, e - b).squaredNorm();
    }
    return p;
  }

 private:
  static std::uint64_t bit(int mode) { return (std::uint64_t)1 << (8 * mode); }

  std::int32_t lookup(std::uint64_t key) const { return index_.at(key); }

  // Fill grade n in descending lexicographic order of the occupation tuple.
  void enumerate_grade(int remaining, int mode, std::vector<int>& state) {
    if (mode == M_ - 1) {
      state[mode] = remaining;
      push(state);
      state[mode] = 0;
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      state[mode] = c;
      enumerate_grade(remaining - c, mode + 1, state);
    }
    state[mode] = 0;
  }

  void push(const std::vector<int>& state) {
    std::uint64_t key = 0;
    int tot = 0;
    for (int i = 0; i < M_; ++i) {
      key |= (std::uint64_t)state[i] << (8 * i);
      tot += state[i];
    }
    occ_.push_back(key);
    total_.push_back((std::uint8_t)tot);
  }

  int M_, n_max_;
  std::vector<std::uint64_t> occ_;
  std::vector<std::uint8_t> total_;
  std::vector<std::int64_t> grade_begin_;
  std::vector<std::int32_t> up_, dn_;
  std::vector<double> sqrt_;
  std::unordered_map<std::uint64_t, std::int32_t> index_;
};

inline FockSpace enumerate_basis(int M, int n_max,
                                 std::int64_t dim_budget = 2'000'000) {
  return FockSpace(M, n_max, dim_budget);
}

}  // namespace pexlab

#endif
