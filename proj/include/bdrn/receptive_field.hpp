#pragma once

#include <stdexcept>
#include <vector>

namespace bdrn {

struct ConvStackLayer {
    int kernel = 3;
    int dilation = 1;
    bool causal = false;
};

struct ReceptiveField {
    int64_t length = 1;
    int64_t left_extent = 0;
    int64_t right_extent = 0;
};

/// length = 1 + sum (k-1)*d; causal layers extend only into the past,
/// centered (bidirectional) layers extend (k-1)/2*d each way.
inline ReceptiveField receptive_field(const std::vector<ConvStackLayer>& layers) {
    if (layers.empty()) throw std::invalid_argument("receptive_field: empty layer list");
    ReceptiveField rf;
    for (const auto& l : layers) {
        if (l.kernel < 2) throw std::invalid_argument("receptive_field: kernel must be >= 2");
        if (l.dilation < 1) throw std::invalid_argument("receptive_field: dilation must be >= 1");
        const int64_t span = static_cast<int64_t>(l.kernel - 1) * l.dilation;
        if (l.causal) {
            rf.left_extent += span;
        } else {
            if (l.kernel % 2 == 0)
                throw std::invalid_argument("receptive_field: bidirectional layer needs odd kernel");
            rf.left_extent += span / 2;
            rf.right_extent += span / 2;
        }
        rf.length += span;
    }
    return rf;
}

}  // namespace bdrn
