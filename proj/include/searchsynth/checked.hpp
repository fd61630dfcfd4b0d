#pragma once

#include "searchsynth/errors.hpp"

#include <cstdint>

namespace searchsynth {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw EvalError("integer overflow in addition");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw EvalError("integer overflow in multiplication");
    return r;
}

} // namespace searchsynth
