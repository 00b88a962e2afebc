#include "fermech/label.hpp"

#include "fermech/errors.hpp"

namespace fermech {

std::string_view label_name(int label) {
    require_label(label, "label_name");
    return kClassNames[static_cast<std::size_t>(label)];
}

int parse_label(std::string_view name) {
    for (int k = 0; k < kNumClasses; ++k) {
        if (kClassNames[static_cast<std::size_t>(k)] == name) return k;
    }
    throw DomainError("unknown expression label '" + std::string(name) + "'");
}

void require_label(int label, const char* who) {
    if (label < 0 || label >= kNumClasses) {
        throw DomainError(std::string(who) + ": label " + std::to_string(label) +
                          " outside 0.." + std::to_string(kNumClasses - 1));
    }
}

}  // namespace fermech
