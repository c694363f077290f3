// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/font5x7.hpp"

namespace vtp {

namespace {
// rows top to bottom, bit 4 = leftmost column
constexpr uint8_t kDigits[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};
} // namespace

bool digit_pixel(int digit, int col, int row) {
    if (digit < 0 || digit > 9 || col < 0 || col >= kGlyphWidth || row < 0 || row >= kGlyphHeight)
        return false;
    return (kDigits[digit][row] >> (kGlyphWidth - 1 - col)) & 1;
}

} // namespace vtp
