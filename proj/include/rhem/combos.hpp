#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "rhem/errors.hpp"

namespace rhem {

// Visits all size-k sorted subsets of `items`, k <= 3.
template <typename T, typename Fn>
void for_each_combo(std::span<const T> items, std::uint8_t k, Fn&& fn) {
  const std::size_t n = items.size();
  if (k > n) return;
  std::array<T, 3> buf{};
  switch (k) {
    case 0:
      fn(std::span<const T>{});
      return;
    case 1:
      for (std::size_t a = 0; a < n; ++a) {
        buf[0] = items[a];
        fn(std::span<const T>(buf.data(), 1));
      }
      return;
    case 2:
      for (std::size_t a = 0; a + 1 < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          buf[0] = items[a];
          buf[1] = items[b];
          fn(std::span<const T>(buf.data(), 2));
        }
      return;
    case 3:
      for (std::size_t a = 0; a + 2 < n; ++a)
        for (std::size_t b = a + 1; b + 1 < n; ++b)
          for (std::size_t c = b + 1; c < n; ++c) {
            buf[0] = items[a];
            buf[1] = items[b];
            buf[2] = items[c];
            fn(std::span<const T>(buf.data(), 3));
          }
      return;
    default:
      fail(ErrorCode::BadSubsetOrder, "subset order above 3");
  }
}

}  // namespace rhem
