// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace vtp {

/// Fixed 5x7 bitmap glyphs for the digits 0-9. Bundled so number markers
/// render identically everywhere; system fonts would break golden images.
/// Returns true when the glyph covers (col,row), col in [0,5), row in [0,7).
bool digit_pixel(int digit, int col, int row);

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphAdvance = 6;  // one blank column between digits

} // namespace vtp
