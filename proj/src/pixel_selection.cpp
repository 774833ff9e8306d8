#include <algorithm>
#include <cmath>
#include <vector>

#include "pba/kernels.hpp"
#include "pba/solver.hpp"

namespace pba {

// Region-adaptive gradient selection: per block, threshold at the median
// gradient magnitude plus an offset, then fill round-robin from the
// strongest candidates so texture-rich blocks cannot starve the rest.
std::vector<Pixel> select_pixels(const ImageF& image, int target_count,
                                 const SelectOptions& opts) {
    std::vector<Pixel> out;
    if (image.empty() || target_count <= 0) return out;
    const int w = image.width(), h = image.height();
    if (w < 2 * opts.margin + 2 || h < 2 * opts.margin + 2) return out;

    std::vector<float> gx(static_cast<size_t>(w) * h), gy(gx.size());
    kernels::active().grad_xy(image.data(), w, h, gx.data(), gy.data());

    struct Candidate {
        float mag;
        int x, y;
    };
    const int bx = (w + opts.block - 1) / opts.block;
    const int by = (h + opts.block - 1) / opts.block;
    std::vector<std::vector<Candidate>> blocks(static_cast<size_t>(bx) * by);
    std::vector<float> mags;

    for (int j = 0; j < by; ++j) {
        for (int i = 0; i < bx; ++i) {
            const int x0 = std::max(i * opts.block, opts.margin);
            const int x1 = std::min((i + 1) * opts.block, w - opts.margin);
            const int y0 = std::max(j * opts.block, opts.margin);
            const int y1 = std::min((j + 1) * opts.block, h - opts.margin);
            if (x0 >= x1 || y0 >= y1) continue;

            mags.clear();
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const size_t idx = static_cast<size_t>(y) * w + x;
                    mags.push_back(std::hypot(gx[idx], gy[idx]));
                }
            }
            std::vector<float> med = mags;
            std::nth_element(med.begin(), med.begin() + med.size() / 2, med.end());
            const float threshold =
                med[med.size() / 2] + static_cast<float>(opts.grad_threshold);

            auto& cands = blocks[static_cast<size_t>(j) * bx + i];
            size_t k = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x, ++k) {
                    if (mags[k] > threshold) cands.push_back({mags[k], x, y});
                }
            }
            std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
                if (a.mag != b.mag) return a.mag > b.mag;
                return a.y != b.y ? a.y < b.y : a.x < b.x;
            });
        }
    }

    std::vector<size_t> cursor(blocks.size(), 0);
    bool any = true;
    while (static_cast<int>(out.size()) < target_count && any) {
        any = false;
        for (size_t b = 0; b < blocks.size() && static_cast<int>(out.size()) < target_count;
             ++b) {
            if (cursor[b] < blocks[b].size()) {
                const Candidate& c = blocks[b][cursor[b]++];
                out.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
                any = true;
            }
        }
    }
    return out;
}

}  // namespace pba
