#include "snf.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("snf overflow");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("snf overflow");
  return r;
}

// m[r] -= f * m[s]
void row_axpy(IntMatrix& m, std::size_t r, std::size_t s, std::int64_t f) {
  if (f == 0) return;
  for (std::size_t j = 0; j < m[r].size(); ++j) {
    if (m[s][j] != 0) m[r][j] = checked_sub(m[r][j], checked_mul(f, m[s][j]));
  }
}

void col_axpy(IntMatrix& m, std::size_t c, std::size_t s, std::int64_t f) {
  if (f == 0) return;
  for (auto& row : m) {
    if (row[s] != 0) row[c] = checked_sub(row[c], checked_mul(f, row[s]));
  }
}

void subsets(const std::vector<int>& cell, std::size_t size, std::set<std::vector<int>>& out) {
  const std::size_t n = cell.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
  do {
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) s.push_back(cell[i]);
    }
    out.insert(s);
  } while (std::prev_permutation(pick.begin(), pick.end()));
}

}  // namespace

std::vector<std::int64_t> smith_diagonal(IntMatrix m) {
  std::vector<std::int64_t> diag;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t t = 0;
  while (t < rows && t < cols) {
    // Pivot: smallest nonzero magnitude in the remaining block.
    std::size_t pr = rows, pc = cols;
    std::int64_t best = 0;
    for (std::size_t i = t; i < rows; ++i) {
      for (std::size_t j = t; j < cols; ++j) {
        const std::int64_t v = std::llabs(m[i][j]);
        if (v != 0 && (best == 0 || v < best)) {
          best = v;
          pr = i;
          pc = j;
        }
      }
    }
    if (best == 0) break;
    std::swap(m[t], m[pr]);
    for (auto& row : m) std::swap(row[t], row[pc]);

    bool done = false;
    while (!done) {
      done = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (m[i][t] == 0) continue;
        row_axpy(m, i, t, m[i][t] / m[t][t]);
        if (m[i][t] != 0) {
          std::swap(m[t], m[i]);
          done = false;
        }
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (m[t][j] == 0) continue;
        col_axpy(m, j, t, m[t][j] / m[t][t]);
        if (m[t][j] != 0) {
          for (auto& row : m) std::swap(row[t], row[j]);
          done = false;
        }
      }
      if (!done) continue;
      // The pivot must divide every remaining entry.
      for (std::size_t i = t + 1; i < rows && done; ++i) {
        for (std::size_t j = t + 1; j < cols; ++j) {
          if (m[i][j] % m[t][t] != 0) {
            for (std::size_t k = 0; k < cols; ++k) m[t][k] = m[t][k] + m[i][k];
            done = false;
            break;
          }
        }
      }
    }
    diag.push_back(std::llabs(m[t][t]));
    ++t;
  }
  return diag;
}

namespace {

struct RelativeChains {
  std::vector<std::map<std::vector<int>, std::size_t>> index;
};

RelativeChains relative_chains(int dim, const std::vector<std::vector<int>>& cells,
                               const std::vector<std::vector<int>>& subcomplex_facets) {
  std::vector<std::set<std::vector<int>>> k(dim + 1), l(dim + 1);
  for (auto cell : cells) {
    std::sort(cell.begin(), cell.end());
    for (int q = 0; q <= dim; ++q) subsets(cell, static_cast<std::size_t>(q + 1), k[q]);
  }
  for (auto f : subcomplex_facets) {
    std::sort(f.begin(), f.end());
    for (int q = 0; q < dim; ++q) subsets(f, static_cast<std::size_t>(q + 1), l[q]);
  }
  // Relative chains: simplices of K not in L.
  RelativeChains rc;
  rc.index.resize(dim + 1);
  for (int q = 0; q <= dim; ++q) {
    for (const auto& s : k[q]) {
      if (!l[q].count(s)) rc.index[q].emplace(s, rc.index[q].size());
    }
  }
  return rc;
}

// Column j of the boundary C_q -> C_{q-1}: (row, sign) pairs.
std::vector<std::pair<std::size_t, int>> boundary_column(const RelativeChains& rc, int q, const std::vector<int>& s) {
  std::vector<std::pair<std::size_t, int>> col;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<int> face = s;
    face.erase(face.begin() + static_cast<long>(i));
    auto it = rc.index[q - 1].find(face);
    if (it != rc.index[q - 1].end()) col.emplace_back(it->second, (i % 2 == 0) ? 1 : -1);
  }
  return col;
}

constexpr std::int64_t kPrime = 2147483629;  // below 2^31

std::int64_t inverse_mod(std::int64_t a) {
  std::int64_t r = 1, b = a % kPrime, e = kPrime - 2;
  if (b < 0) b += kPrime;
  while (e > 0) {
    if (e & 1) r = static_cast<std::int64_t>((static_cast<__int128>(r) * b) % kPrime);
    b = static_cast<std::int64_t>((static_cast<__int128>(b) * b) % kPrime);
    e >>= 1;
  }
  return r;
}

using SparseVec = std::map<std::size_t, std::int64_t>;

long sparse_rank_mod_p(std::vector<SparseVec> cols) {
  // Pivot on the largest row index of each reduced column.
  std::map<std::size_t, SparseVec> pivots;
  long rank = 0;
  for (SparseVec& c : cols) {
    while (!c.empty()) {
      const std::size_t lead = c.rbegin()->first;
      auto it = pivots.find(lead);
      if (it == pivots.end()) {
        const std::int64_t inv = inverse_mod(c.rbegin()->second);
        for (auto& [r, v] : c) v = static_cast<std::int64_t>((static_cast<__int128>(v) * inv) % kPrime);
        pivots.emplace(lead, std::move(c));
        ++rank;
        break;
      }
      const std::int64_t f = c.rbegin()->second;
      for (const auto& [r, v] : it->second) {
        std::int64_t& t = c[r];
        t = static_cast<std::int64_t>((t - static_cast<__int128>(f) * v) % kPrime);
        if (t < 0) t += kPrime;
        if (t == 0) c.erase(r);
      }
    }
  }
  return rank;
}

}  // namespace

std::vector<long> relative_betti_mod_p(int dim, const std::vector<std::vector<int>>& cells,
                                       const std::vector<std::vector<int>>& subcomplex_facets) {
  const RelativeChains rc = relative_chains(dim, cells, subcomplex_facets);
  std::vector<long> rank(dim + 2, 0);
  for (int q = 1; q <= dim; ++q) {
    std::vector<SparseVec> cols;
    cols.reserve(rc.index[q].size());
    for (const auto& [s, j] : rc.index[q]) {
      SparseVec c;
      for (const auto& [r, sign] : boundary_column(rc, q, s)) c[r] = sign > 0 ? 1 : kPrime - 1;
      cols.push_back(std::move(c));
    }
    rank[q] = sparse_rank_mod_p(std::move(cols));
  }
  std::vector<long> betti;
  for (int q = 0; q <= dim; ++q) betti.push_back(static_cast<long>(rc.index[q].size()) - rank[q] - rank[q + 1]);
  return betti;
}

RelativeHomology relative_homology(int dim, const std::vector<std::vector<int>>& cells,
                                   const std::vector<std::vector<int>>& subcomplex_facets) {
  const RelativeChains rc = relative_chains(dim, cells, subcomplex_facets);
  std::vector<long> rank(dim + 2, 0);
  std::vector<std::vector<std::int64_t>> snf(dim + 2);
  for (int q = 1; q <= dim; ++q) {
    IntMatrix b(rc.index[q - 1].size(), std::vector<std::int64_t>(rc.index[q].size(), 0));
    for (const auto& [s, j] : rc.index[q]) {
      for (const auto& [r, sign] : boundary_column(rc, q, s)) b[r][j] = sign;
    }
    snf[q] = smith_diagonal(b);
    rank[q] = static_cast<long>(snf[q].size());
  }
  RelativeHomology h;
  for (int q = 0; q <= dim; ++q) {
    h.betti.push_back(static_cast<long>(rc.index[q].size()) - rank[q] - rank[q + 1]);
    std::vector<std::int64_t> tor;
    for (std::int64_t v : snf[q + 1]) {
      if (v > 1) tor.push_back(v);
    }
    h.torsion.push_back(tor);
  }
  return h;
}

}  // namespace oracle
