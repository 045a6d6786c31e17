#include "model/layout.hpp"

namespace hsie::model {

void HsieConfig::validate() const {
    require(k >= 1, "model config: k must be >= 1");
    require(feat >= 3, "model config: feat must be >= 3 (three parallel shallow branches)");
    require(n_cab >= 1, "model config: n_cab must be >= 1");
    require(n_dense >= 1, "model config: n_dense must be >= 1");
    require(eca_kernel >= 1 && eca_kernel % 2 == 1, "model config: eca_kernel must be odd and positive");
    require(mask_channels >= 1, "model config: mask_channels must be >= 1");
    require(growth >= 1, "model config: growth must be >= 1");
}

std::array<int, 3> sfe_split(int feat) {
    const int base = feat / 3, rem = feat % 3;
    return {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
}

std::size_t Layout::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.param_count();
    return n;
}

Layout make_layout(const HsieConfig& cfg) {
    cfg.validate();
    Layout lay;
    lay.config = cfg;
    auto add = [&](std::string name, int out, int in, int ksize, bool bias = true, bool conv1d = false) {
        lay.layers.push_back({std::move(name), out, in, conv1d ? 1 : ksize, ksize, bias, conv1d});
        return static_cast<int>(lay.layers.size()) - 1;
    };

    const auto split = sfe_split(cfg.feat);
    const int ks[3] = {3, 5, 7};
    for (int i = 0; i < 3; ++i)
        lay.index.sfe_band[i] = add("sfe.band" + std::to_string(ks[i]), split[i], 1, ks[i]);
    for (int i = 0; i < 3; ++i)
        lay.index.sfe_adjacent[i] = add("sfe.adjacent" + std::to_string(ks[i]), split[i], cfg.k, ks[i]);
    lay.index.sfe_merge = add("sfe.merge", cfg.feat, 2 * cfg.feat, 3);

    for (int n = 0; n < cfg.n_cab; ++n) {
        LayerIndex::Cab cab;
        const std::string prefix = "cab" + std::to_string(n);
        for (int c = 0; c < cfg.n_dense; ++c)
            cab.dense.push_back(add(prefix + ".dense" + std::to_string(c), cfg.growth, cfg.feat + c * cfg.growth, 3));
        cab.transition = add(prefix + ".transition", cfg.feat, cfg.feat + cfg.n_dense * cfg.growth, 1);
        cab.eca = add(prefix + ".eca", 1, 1, cfg.eca_kernel, false, true);
        lay.index.cabs.push_back(std::move(cab));
    }
    lay.index.fusion = add("fusion", cfg.feat, (cfg.n_cab + 1) * cfg.feat, 1);
    lay.index.recon = add("recon", 1, cfg.feat, 3);

    lay.index.refine_head = add("refine.head", cfg.mask_channels, 3, 3);
    for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 2; ++c)
            lay.index.refine_blocks[b][c] = add("refine.block" + std::to_string(b) + ".conv" + std::to_string(c),
                                                cfg.mask_channels, cfg.mask_channels, 3);
    lay.index.refine_tail = add("refine.tail", 1, cfg.mask_channels, 3);
    lay.index.final_conv = add("final", 1, 1, 3);
    return lay;
}

}  // namespace hsie::model
