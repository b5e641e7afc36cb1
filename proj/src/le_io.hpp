#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <ostream>

#include "ggd/error.hpp"

namespace ggd::detail {

template <typename U>
void put_le(std::ostream& out, U v) {
    std::array<char, sizeof(U)> b{};
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b.data(), b.size());
}

template <typename U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in) throw IoError("truncated binary stream");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
}

}  // namespace ggd::detail
