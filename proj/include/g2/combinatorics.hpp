#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace g2 {

inline constexpr int kDim = 7;

using Mask = std::uint8_t;

constexpr int popcount(Mask m) {
  int c = 0;
  for (; m; m &= static_cast<Mask>(m - 1)) ++c;
  return c;
}

constexpr int binom7(int k) {
  constexpr std::array<int, 8> t{1, 7, 21, 35, 35, 21, 7, 1};
  return (k < 0 || k > 7) ? 0 : t[k];
}

// Sign of e^I ^ e^J relative to e^{I u J}; zero when I and J overlap.
constexpr int merge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (int j = 0; j < kDim; ++j) {
    if (!(b >> j & 1)) continue;
    Mask above = static_cast<Mask>(a >> (j + 1));
    inversions += popcount(above);
  }
  return (inversions & 1) ? -1 : 1;
}

constexpr Mask full_mask() { return 0x7f; }

struct IndexTables {
  std::array<std::vector<Mask>, kDim + 1> masks;
  std::array<int, 128> position{};
};

// Lexicographic enumeration of ascending multi-indices per degree.
inline const IndexTables& index_tables() {
  static const IndexTables tables = [] {
    IndexTables t;
    for (int k = 0; k <= kDim; ++k) {
      std::vector<int> idx(k);
      for (int i = 0; i < k; ++i) idx[i] = i;
      while (true) {
        Mask m = 0;
        for (int i : idx) m |= static_cast<Mask>(1u << i);
        t.position[m] = static_cast<int>(t.masks[k].size());
        t.masks[k].push_back(m);
        int p = k - 1;
        while (p >= 0 && idx[p] == kDim - k + p) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      }
    }
    return t;
  }();
  return tables;
}

inline const std::vector<Mask>& masks_of_degree(int k) { return index_tables().masks[k]; }
inline int position_of(Mask m) { return index_tables().position[m]; }

inline std::vector<int> indices_of(Mask m) {
  std::vector<int> out;
  for (int i = 0; i < kDim; ++i)
    if (m >> i & 1) out.push_back(i);
  return out;
}

}  // namespace g2
