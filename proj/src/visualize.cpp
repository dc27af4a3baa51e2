#include "frpt/visualize.hpp"

#include "frpt/image_io.hpp"

namespace frpt {

WarpVisual warp_visualization(const Tensor<float>& image, BackboneModel<float>& backbone, DppParams<float>& params) {
    Record<float> rec;
    const DppOutput<float> out = dpp_forward(rec, rec.leaf(image), backbone, params);
    const std::size_t h = image.dim(1), w = image.dim(2);
    const auto mv = out.map.weights.value();
    const std::size_t hs = out.map.weights.shape()[0], ws = out.map.weights.shape()[1];
    const Tensor<float> small = stretch(Tensor<float>({hs, ws}, std::vector<float>(mv.begin(), mv.end())));
    Tensor<float> big({h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) big.data()[y * w + x] = small.data()[(y * hs / h) * ws + x * ws / w];
    const auto pv = out.prompted.value();
    const Tensor<float> warped({3, h, w}, std::vector<float>(pv.begin(), pv.end()));
    return {to_gray(image), to_gray(warped), big};
}

void write_warp_visualization(const std::filesystem::path& stem, const WarpVisual& visual) {
    auto with = [&stem](const char* suffix) {
        std::filesystem::path p = stem;
        p += suffix;
        return p;
    };
    write_pgm(with(".orig.pgm"), visual.original);
    write_pgm(with(".warped.pgm"), visual.warped);
    write_pgm(with(".map.pgm"), visual.map);
}

}  // namespace frpt
