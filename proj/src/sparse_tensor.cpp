#include "recon/sparse_tensor.hpp"

#include <algorithm>

#include "recon/errors.hpp"

namespace recon {

namespace {

uint64_t coord_hash(const VoxelCoord& c) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (int32_t v : c) {
        h ^= static_cast<uint32_t>(v);
        h *= 0x100000001b3ull;
    }
    return h;
}

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

SiteIndex::SiteIndex(const std::vector<VoxelCoord>& sites) {
    count_ = sites.size();
    size_t cap = next_pow2(std::max<size_t>(8, sites.size() * 2));
    slots_.assign(cap, Slot{});
    mask_ = cap - 1;
    for (size_t i = 0; i < sites.size(); ++i) {
        size_t h = coord_hash(sites[i]) & mask_;
        while (slots_[h].index >= 0) {
            if (slots_[h].coord == sites[i])
                throw ArgumentError("SiteIndex: duplicate site");
            h = (h + 1) & mask_;
        }
        slots_[h].coord = sites[i];
        slots_[h].index = static_cast<int>(i);
    }
}

int SiteIndex::find(const VoxelCoord& c) const {
    if (slots_.empty()) return -1;
    size_t h = coord_hash(c) & mask_;
    while (slots_[h].index >= 0) {
        if (slots_[h].coord == c) return slots_[h].index;
        h = (h + 1) & mask_;
    }
    return -1;
}

SparseVoxelTensor::SparseVoxelTensor(std::vector<VoxelCoord> site_list,
                                     int channel_count, int stride_)
    : sites(std::move(site_list)),
      features(sites.size() * channel_count, 0.0),
      channels(channel_count),
      stride(stride_),
      index(sites) {}

SparseVoxelTensor SparseVoxelTensor::like(int channel_count) const {
    SparseVoxelTensor t;
    t.sites = sites;
    t.features.assign(sites.size() * channel_count, 0.0);
    t.channels = channel_count;
    t.stride = stride;
    t.index = index;
    return t;
}

SparseVoxelTensor make_sparse_tensor(std::vector<VoxelCoord> sites, int channels,
                                     int stride) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    return SparseVoxelTensor(std::move(sites), channels, stride);
}

std::vector<VoxelCoord> conv_output_sites(const std::vector<VoxelCoord>& in_sites,
                                          ConvMode mode) {
    if (mode == ConvMode::submanifold) return in_sites;
    if (mode == ConvMode::strided2) {
        std::vector<VoxelCoord> out;
        out.reserve(in_sites.size());
        auto down = [](int32_t v) -> int32_t {
            return static_cast<int32_t>(std::floor(v / 2.0));
        };
        for (const auto& c : in_sites) out.push_back({down(c[0]), down(c[1]), down(c[2])});
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    throw StateError("conv_output_sites: inverse2 needs the recorded fine site set");
}

ConvRulebook build_rulebook(const SparseVoxelTensor& input,
                            const std::vector<VoxelCoord>& out_sites,
                            const SiteIndex& out_index, ConvMode mode) {
    (void)out_index;
    ConvRulebook rb;
    rb.pairs.resize(27);
    rb.n_in = input.site_count();
    rb.n_out = out_sites.size();

    auto offset_of = [](int k) {
        return VoxelCoord{static_cast<int32_t>(k % 3 - 1),
                          static_cast<int32_t>((k / 3) % 3 - 1),
                          static_cast<int32_t>(k / 9 - 1)};
    };

    for (int k = 0; k < 27; ++k) {
        VoxelCoord d = offset_of(k);
        auto& pk = rb.pairs[k];
        switch (mode) {
            case ConvMode::submanifold:
                for (size_t o = 0; o < out_sites.size(); ++o) {
                    VoxelCoord c = {out_sites[o][0] + d[0], out_sites[o][1] + d[1],
                                    out_sites[o][2] + d[2]};
                    int i = input.index.find(c);
                    if (i >= 0) pk.emplace_back(i, static_cast<int>(o));
                }
                break;
            case ConvMode::strided2:
                for (size_t o = 0; o < out_sites.size(); ++o) {
                    VoxelCoord c = {2 * out_sites[o][0] + d[0], 2 * out_sites[o][1] + d[1],
                                    2 * out_sites[o][2] + d[2]};
                    int i = input.index.find(c);
                    if (i >= 0) pk.emplace_back(i, static_cast<int>(o));
                }
                break;
            case ConvMode::inverse2:
                // Exact transpose of strided2: fine output c receives coarse
                // input q whenever 2q + d == c.
                for (size_t o = 0; o < out_sites.size(); ++o) {
                    int32_t qx = out_sites[o][0] - d[0];
                    int32_t qy = out_sites[o][1] - d[1];
                    int32_t qz = out_sites[o][2] - d[2];
                    if ((qx & 1) || (qy & 1) || (qz & 1)) continue;
                    int i = input.index.find({qx / 2, qy / 2, qz / 2});
                    if (i >= 0) pk.emplace_back(i, static_cast<int>(o));
                }
                break;
        }
    }
    return rb;
}

}  // namespace recon
