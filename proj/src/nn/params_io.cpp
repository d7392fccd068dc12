#include "gocollab/nn/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "gocollab/errors.hpp"

namespace gocollab::nn {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IoError(std::string("parameter file truncated while reading ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& is, const char* what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw IoError(std::string("parameter file truncated while reading ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

std::vector<const Tensor*> layer_tensors(const LayerParams& lp) {
    std::vector<const Tensor*> ts;
    if (!lp.weight.empty()) ts.push_back(&lp.weight);
    if (!lp.bias.empty()) ts.push_back(&lp.bias);
    if (!lp.gamma.empty()) {
        ts.push_back(&lp.gamma);
        ts.push_back(&lp.sigma);
        ts.push_back(&lp.mu);
        ts.push_back(&lp.beta);
    }
    return ts;
}

std::vector<Tensor*> layer_tensors_mut(LayerParams& lp) {
    std::vector<Tensor*> ts;
    if (!lp.weight.empty()) ts.push_back(&lp.weight);
    if (!lp.bias.empty()) ts.push_back(&lp.bias);
    if (!lp.gamma.empty()) {
        ts.push_back(&lp.gamma);
        ts.push_back(&lp.sigma);
        ts.push_back(&lp.mu);
        ts.push_back(&lp.beta);
    }
    return ts;
}

constexpr char kMagic[4] = {'C', 'C', 'N', 'N'};

}  // namespace

void save_params(const std::filesystem::path& path, const Parameters& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kParamsFormatVersion);
    put_u32(os, static_cast<std::uint32_t>(params.layers.size()));
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        const auto ts = layer_tensors(params.layers[li]);
        put_u32(os, static_cast<std::uint32_t>(li));
        put_u32(os, static_cast<std::uint32_t>(ts.size()));
        for (const Tensor* t : ts) {
            put_u32(os, static_cast<std::uint32_t>(t->rank()));
            for (int d : t->shape()) put_u32(os, static_cast<std::uint32_t>(d));
            for (double v : t->flat()) put_f64(os, v);
        }
    }
    if (!os) throw IoError("write failed for " + path.string());
}

Parameters load_params(const std::filesystem::path& path, const NetworkSpec& net) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open parameter file " + path.string());

    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad magic in " + path.string() + " (not a parameter file)");
    const std::uint32_t version = get_u32(is, "version");
    if (version != kParamsFormatVersion)
        throw IoError("parameter format version mismatch in " + path.string() + ": file has v" +
                      std::to_string(version) + ", expected v" +
                      std::to_string(kParamsFormatVersion));

    // Template shapes come from a fresh init; the file must match them.
    Rng rng(0);
    Parameters params = init_params(net, rng);

    const std::uint32_t layer_count = get_u32(is, "layer count");
    if (layer_count != params.layers.size())
        throw IoError("layer count mismatch in " + path.string() + ": file has " +
                      std::to_string(layer_count) + ", network expects " +
                      std::to_string(params.layers.size()));

    for (std::uint32_t li = 0; li < layer_count; ++li) {
        const std::uint32_t idx = get_u32(is, "layer index");
        if (idx != li) throw IoError("layer chunk out of order in " + path.string());
        auto ts = layer_tensors_mut(params.layers[li]);
        const std::uint32_t count = get_u32(is, "tensor count");
        if (count != ts.size())
            throw IoError("tensor count mismatch at layer " + std::to_string(li) + " in " +
                          path.string());
        for (Tensor* t : ts) {
            const std::uint32_t rank = get_u32(is, "tensor rank");
            if (rank != static_cast<std::uint32_t>(t->rank()))
                throw IoError("tensor rank mismatch at layer " + std::to_string(li) + " in " +
                              path.string());
            for (int d : t->shape()) {
                const std::uint32_t dim = get_u32(is, "tensor dim");
                if (dim != static_cast<std::uint32_t>(d))
                    throw IoError("tensor shape mismatch at layer " + std::to_string(li) + " in " +
                                  path.string());
            }
            for (double& v : t->flat()) v = get_f64(is, "tensor payload");
        }
    }
    // no trailing bytes allowed
    char extra;
    if (is.read(&extra, 1))
        throw IoError("trailing bytes in " + path.string());
    return params;
}

}  // namespace gocollab::nn
