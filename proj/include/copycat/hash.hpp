#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace copycat {

// FNV-1a 64-bit; stable across platforms, used for config and registry digests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex_digest(std::uint64_t h);

}  // namespace copycat
