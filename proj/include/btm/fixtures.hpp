#pragma once

#include <cstdint>
#include <vector>

#include "btm/pmf.hpp"

// Frozen trap configurations shared by tests and the command-line checks.
// Both were drawn once from seeded landscapes and are pinned here as plain
// numbers so every consumer sees bit-identical windows.

namespace btm::fixtures {

/// 21 sites on z = -10..10; shallow traps of order 1..30 with four deep
/// ones (up to ~2.6e12) that dominate the long-time behaviour.
inline const std::int64_t kLine21Lo = -10;
inline const std::vector<double>& line21_sigma() {
  static const std::vector<double> s = {
      31.659802879701079,  3.3462070342106789, 12.101184895950738,
      32285.766574271067,  3.0564826482967469, 14.130789932487863,
      3053729.5073081572,  4.9695181368220265, 12.673687363624451,
      4.9904681012892276,  5.008348356246116,  2.9991742396138266,
      2.7470989406161932,  8.0143729564023012, 3.5410814558741763,
      6724257942.1386099,  149.34592335396701, 1994.2800081881144,
      2642195590292.5347,  9.0645247034947438, 2.7711270330346589,
  };
  return s;
}
inline Window line21() { return Window::from_sigma(kLine21Lo, line21_sigma()); }

/// 11-site ring, moderate depths (max ~52), used for the periodic-chain
/// equilibrium and monotonicity checks.
inline const std::int64_t kRing11Lo = 0;
inline const std::vector<double>& ring11_sigma() {
  static const std::vector<double> s = {
      4.8339082791494796, 6.6489194513220706, 32.450546957699927,
      2.8500639727069004, 52.151653077148971, 13.243534479080262,
      5.3108613744511013, 3.161430821991988,  4.8560279764426211,
      7.1847357103322711, 5.6518442093863435,
  };
  return s;
}
inline Window ring11() { return Window::from_sigma(kRing11Lo, ring11_sigma()); }

}  // namespace btm::fixtures
