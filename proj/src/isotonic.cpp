#include "invt/isotonic.hpp"

namespace invt {

std::vector<double> isotonic_increasing(std::span<const double> values) {
    struct Block {
        double sum;
        double count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (double v : values) {
        blocks.push_back({v, 1.0});
        while (blocks.size() > 1) {
            const Block& last = blocks.back();
            const Block& prev = blocks[blocks.size() - 2];
            if (prev.sum / prev.count <= last.sum / last.count) break;
            const Block merged{prev.sum + last.sum, prev.count + last.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const Block& b : blocks)
        for (double i = 0; i < b.count; ++i) out.push_back(b.sum / b.count);
    return out;
}

}  // namespace invt
