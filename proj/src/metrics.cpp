#include "vid3d/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vid3d/error.hpp"

namespace vid3d {

double mse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("image shapes differ");
    if (a.data.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const Image& rendered, const Image& ground_truth) {
    const double e = mse(rendered, ground_truth);
    if (e <= 0.0) return kPsnrSentinel;
    return std::min(kPsnrSentinel, 10.0 * std::log10(1.0 / e));
}

}  // namespace vid3d
