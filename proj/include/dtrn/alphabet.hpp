#pragma once

#include <optional>
#include <string>

namespace dtrn {

// The 36-class case-insensitive character set: '0'-'9' then 'a'-'z'.
// Class index equals position; the CTC blank is the extra class 36 and is
// never a member of the alphabet itself.
class Alphabet {
 public:
  static constexpr int kNumChars = 36;
  static constexpr int kBlank = 36;
  static constexpr int kNumClasses = 37;  // 36 characters + blank

  // Class index for a character, folding upper case; nullopt if outside.
  static std::optional<int> index_of(char c);

  // Character for a class index in [0, 36).
  static char char_at(int index);

  // Lowercases and validates; throws ValidationError naming the offender.
  static std::string fold(const std::string& label);

  static bool valid_label(const std::string& label);
};

}  // namespace dtrn
