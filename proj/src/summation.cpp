#include "rhls/summation.hpp"

namespace rhls {

namespace {

constexpr std::size_t kBlock = 64;

template <class Get>
double pairwise(std::size_t lo, std::size_t hi, const Get& get) {
    if (hi - lo <= kBlock) {
        CompensatedSum s;
        for (std::size_t i = lo; i < hi; ++i) s.add(get(i));
        return s.value();
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    CompensatedSum s;
    s.add(pairwise(lo, mid, get));
    s.add(pairwise(mid, hi, get));
    return s.value();
}

} // namespace

double stable_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return pairwise(0, xs.size(), [&](std::size_t i) { return xs[i]; });
}

double stable_dot(std::span<const double> a, std::span<const double> b) {
    if (a.empty()) return 0.0;
    return pairwise(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

} // namespace rhls
