#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace squadsim {

using ProcessId = int;  // 1-based, P_1 .. P_n
using View = std::int64_t;
using Epoch = std::int64_t;
using Value = std::int64_t;

struct SystemSize {
  int n = 4;
  int f = 1;

  static SystemSize from_n(int n) {
    if (n < 4 || (n - 1) % 3 != 0)
      throw std::invalid_argument("n must equal 3f+1 for an integer f >= 1 (got " + std::to_string(n) + ")");
    return {n, (n - 1) / 3};
  }
  int quorum() const { return 2 * f + 1; }
  int weak_quorum() const { return f + 1; }
};

// Round-robin leader: P_{(v mod n) + 1}.
inline ProcessId leader(View v, int n) { return static_cast<ProcessId>(v % n) + 1; }

}  // namespace squadsim
