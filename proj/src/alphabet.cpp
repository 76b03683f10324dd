#include "dtrn/alphabet.hpp"

#include "dtrn/error.hpp"

namespace dtrn {

std::optional<int> Alphabet::index_of(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'z') return 10 + (c - 'a');
  if (c >= 'A' && c <= 'Z') return 10 + (c - 'A');
  return std::nullopt;
}

char Alphabet::char_at(int index) {
  if (index < 0 || index >= kNumChars) throw ValidationError("alphabet index out of range");
  return index < 10 ? static_cast<char>('0' + index) : static_cast<char>('a' + index - 10);
}

std::string Alphabet::fold(const std::string& label) {
  std::string folded;
  folded.reserve(label.size());
  for (char c : label) {
    auto idx = index_of(c);
    if (!idx) {
      throw ValidationError(std::string("character '") + c + "' is outside the 36-class alphabet");
    }
    folded.push_back(char_at(*idx));
  }
  return folded;
}

bool Alphabet::valid_label(const std::string& label) {
  if (label.empty()) return false;
  for (char c : label) {
    if (!index_of(c)) return false;
  }
  return true;
}

}  // namespace dtrn
