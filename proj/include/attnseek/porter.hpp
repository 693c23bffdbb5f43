#pragma once

#include <string>
#include <string_view>

namespace attnseek {

enum class PorterVariant {
  // Behaviour of Martin Porter's reference C program, which the published
  // voc.txt/output.txt fixtures were generated with. Differs from the 1980
  // article in three places: "bli" -> "ble" instead of "abli" -> "able",
  // an extra "logi" -> "log" rule, and words of one or two letters are
  // returned unchanged.
  reference,
  // The algorithm exactly as published in 1980.
  original,
};

// Porter stemmer, steps 1a through 5b. The input is ASCII case-folded first.
std::string porter_stem(std::string_view word, PorterVariant variant = PorterVariant::reference);

}  // namespace attnseek
