#ifndef EDGEKIT_COMMON_HPP
#define EDGEKIT_COMMON_HPP

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edgekit {

#ifdef EDGEKIT_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

/// All recoverable failures surface as Error; the CLI maps them to a
/// single-line "edgekit: error: <reason>" on stderr and a nonzero exit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void append_all(std::ostringstream&) {}
template <class T, class... Rest>
void append_all(std::ostringstream& os, const T& head, const Rest&... rest) {
    os << head;
    append_all(os, rest...);
}
}  // namespace detail

template <class... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    std::ostringstream os;
    detail::append_all(os, parts...);
    throw Error(os.str());
}

template <class... Parts>
void require(bool cond, const Parts&... parts) {
    if (!cond) fail(parts...);
}

/// FNV-1a 64-bit, used for config/vocabulary/parameter fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t x, std::uint64_t h) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xff);
    return fnv1a(std::string_view(buf, 8), h);
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

}  // namespace edgekit

#endif
