#pragma once

#include <array>
#include <string>
#include <string_view>

namespace fermech {

// The six expression classes, in canonical order.
inline constexpr int kNumClasses = 6;
inline constexpr std::array<std::string_view, 6> kClassNames{"AN", "DI", "FE",
                                                             "HA", "SA", "SU"};

std::string_view label_name(int label);          // DomainError if out of range
int parse_label(std::string_view name);          // DomainError if unknown
void require_label(int label, const char* who);  // DomainError if out of range

}  // namespace fermech
