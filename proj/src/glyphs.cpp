#include <array>
#include <cstdint>
#include <span>

#include "dtrn/alphabet.hpp"
#include "dtrn/data.hpp"
#include "dtrn/error.hpp"

namespace dtrn {

namespace {

// Master strokes at 8x12, one string per row, '#' = ink. Doubled once at
// startup into the 16x24 bitmaps the generator consumes. Index order
// follows the alphabet: '0'-'9' then 'a'-'z'.
const char* const kGlyphArt[Alphabet::kNumChars][12] = {
    // 0
    {".####...", "#....#..", "#....#..", "#....#..", "#....#..", "#....#..", "#....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // 1
    {"..#.....", ".##.....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....",
     "..#.....", ".#####..", "........", "........", "........"},
    // 2
    {".####...", "#....#..", ".....#..", "....#...", "...#....", "..#.....", ".#......",
     "#.......", "######..", "........", "........", "........"},
    // 3
    {".####...", "#....#..", ".....#..", "..###...", ".....#..", ".....#..", ".....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // 4
    {"....#...", "...##...", "..#.#...", ".#..#...", "#...#...", "######..", "....#...",
     "....#...", "....#...", "........", "........", "........"},
    // 5
    {"######..", "#.......", "#.......", "#####...", ".....#..", ".....#..", ".....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // 6
    {"..###...", ".#......", "#.......", "#####...", "#....#..", "#....#..", "#....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // 7
    {"######..", ".....#..", "....#...", "....#...", "...#....", "...#....", "..#.....",
     "..#.....", "..#.....", "........", "........", "........"},
    // 8
    {".####...", "#....#..", "#....#..", ".####...", "#....#..", "#....#..", "#....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // 9
    {".####...", "#....#..", "#....#..", "#....#..", ".#####..", ".....#..", ".....#..",
     "....#...", ".###....", "........", "........", "........"},
    // a
    {"........", "........", "........", ".####...", ".....#..", ".#####..", "#....#..",
     "#....#..", ".#####..", "........", "........", "........"},
    // b
    {"#.......", "#.......", "#.......", "#####...", "#....#..", "#....#..", "#....#..",
     "#....#..", "#####...", "........", "........", "........"},
    // c
    {"........", "........", "........", ".#####..", "#.......", "#.......", "#.......",
     "#.......", ".#####..", "........", "........", "........"},
    // d
    {".....#..", ".....#..", ".....#..", ".#####..", "#....#..", "#....#..", "#....#..",
     "#....#..", ".#####..", "........", "........", "........"},
    // e
    {"........", "........", "........", ".####...", "#....#..", "######..", "#.......",
     "#....#..", ".####...", "........", "........", "........"},
    // f
    {"...##...", "..#.....", "..#.....", "#####...", "..#.....", "..#.....", "..#.....",
     "..#.....", "..#.....", "........", "........", "........"},
    // g
    {"........", "........", "........", ".#####..", "#....#..", "#....#..", "#....#..",
     "#....#..", ".#####..", ".....#..", ".....#..", ".####..."},
    // h
    {"#.......", "#.......", "#.......", "#####...", "#....#..", "#....#..", "#....#..",
     "#....#..", "#....#..", "........", "........", "........"},
    // i
    {"..#.....", "........", ".##.....", "..#.....", "..#.....", "..#.....", "..#.....",
     "..#.....", ".####...", "........", "........", "........"},
    // j
    {"....#...", "........", "...##...", "....#...", "....#...", "....#...", "....#...",
     "....#...", "....#...", "....#...", ".###....", "........"},
    // k
    {"#.......", "#.......", "#.......", "#...#...", "#..#....", "###.....", "#..#....",
     "#...#...", "#....#..", "........", "........", "........"},
    // l
    {".##.....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....", "..#.....",
     "..#.....", ".####...", "........", "........", "........"},
    // m
    {"........", "........", "........", "######..", "#..#..#.", "#..#..#.", "#..#..#.",
     "#..#..#.", "#..#..#.", "........", "........", "........"},
    // n
    {"........", "........", "........", "#####...", "#....#..", "#....#..", "#....#..",
     "#....#..", "#....#..", "........", "........", "........"},
    // o
    {"........", "........", "........", ".####...", "#....#..", "#....#..", "#....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // p
    {"........", "........", "........", "#####...", "#....#..", "#....#..", "#....#..",
     "#####...", "#.......", "#.......", "#.......", "........"},
    // q
    {"........", "........", "........", ".#####..", "#....#..", "#....#..", "#....#..",
     ".#####..", ".....#..", ".....#..", ".....#..", "........"},
    // r
    {"........", "........", "........", "#.####..", "##......", "#.......", "#.......",
     "#.......", "#.......", "........", "........", "........"},
    // s
    {"........", "........", "........", ".#####..", "#.......", ".####...", ".....#..",
     ".....#..", "#####...", "........", "........", "........"},
    // t
    {"..#.....", "..#.....", "######..", "..#.....", "..#.....", "..#.....", "..#.....",
     "..#.....", "...###..", "........", "........", "........"},
    // u
    {"........", "........", "........", "#....#..", "#....#..", "#....#..", "#....#..",
     "#....#..", ".####...", "........", "........", "........"},
    // v
    {"........", "........", "........", "#....#..", "#....#..", "#....#..", ".#..#...",
     ".#..#...", "..##....", "........", "........", "........"},
    // w
    {"........", "........", "........", "#..#..#.", "#..#..#.", "#..#..#.", "#..#..#.",
     "#..#..#.", ".##.##..", "........", "........", "........"},
    // x
    {"........", "........", "........", "#....#..", ".#..#...", "..##....", "..##....",
     ".#..#...", "#....#..", "........", "........", "........"},
    // y
    {"........", "........", "........", "#....#..", "#....#..", "#....#..", "#....#..",
     ".#####..", ".....#..", ".....#..", ".####...", "........"},
    // z
    {"........", "........", "........", "######..", "....#...", "...#....", "..#.....",
     ".#......", "######..", "........", "........", "........"},
};

std::array<std::array<std::uint16_t, kGlyphHeight>, Alphabet::kNumChars> build_bitmaps() {
  std::array<std::array<std::uint16_t, kGlyphHeight>, Alphabet::kNumChars> bitmaps{};
  for (int g = 0; g < Alphabet::kNumChars; ++g) {
    for (std::size_t row = 0; row < kGlyphHeight; ++row) {
      const char* art = kGlyphArt[g][row / 2];
      std::uint16_t bits = 0;
      for (std::size_t col = 0; col < kGlyphWidth; ++col) {
        if (art[col / 2] == '#') bits |= static_cast<std::uint16_t>(1u << (15 - col));
      }
      bitmaps[g][row] = bits;
    }
  }
  return bitmaps;
}

}  // namespace

std::span<const std::uint16_t> glyph_bitmap(char c) {
  static const auto bitmaps = build_bitmaps();
  const auto index = Alphabet::index_of(c);
  if (!index) throw ValidationError(std::string("no glyph for character '") + c + "'");
  return bitmaps[static_cast<std::size_t>(*index)];
}

}  // namespace dtrn
