#pragma once

#include <cstdint>
#include <vector>

#include "recon/geometry.hpp"

namespace recon {

// Open-addressing hash from voxel coordinate to site index. Power-of-two
// capacity, linear probing, build-once.
class SiteIndex {
public:
    SiteIndex() = default;
    explicit SiteIndex(const std::vector<VoxelCoord>& sites);

    // Returns the site index or -1.
    int find(const VoxelCoord& c) const;
    size_t size() const { return count_; }

private:
    struct Slot {
        VoxelCoord coord;
        int index = -1;
    };
    std::vector<Slot> slots_;
    size_t mask_ = 0;
    size_t count_ = 0;
};

// Hash-indexed set of occupied voxel sites with per-site feature rows.
// Sites are stored in canonical (lexicographically sorted) order; `stride`
// counts world cells per site at this pyramid level.
struct SparseVoxelTensor {
    std::vector<VoxelCoord> sites;   // unique, sorted
    std::vector<double> features;    // |sites| x channels, row-major
    int channels = 0;
    int stride = 1;
    SiteIndex index;

    SparseVoxelTensor() = default;
    SparseVoxelTensor(std::vector<VoxelCoord> site_list, int channel_count, int stride_);

    size_t site_count() const { return sites.size(); }
    double* feature(size_t s) { return features.data() + s * channels; }
    const double* feature(size_t s) const { return features.data() + s * channels; }

    SparseVoxelTensor like(int channel_count) const;  // same sites, zero features
};

// Canonicalizes (sorts, dedups) and builds the hash index.
SparseVoxelTensor make_sparse_tensor(std::vector<VoxelCoord> sites, int channels,
                                     int stride = 1);

// Per-kernel-offset gather/scatter pair lists for a 3x3x3 kernel.
struct ConvRulebook {
    // pairs[k] lists (input site, output site) for kernel offset k in
    // lexicographic (dz,dy,dx) order over {-1,0,1}^3.
    std::vector<std::vector<std::pair<int, int>>> pairs;
    size_t n_in = 0, n_out = 0;
};

enum class ConvMode { submanifold, strided2, inverse2 };

// Output site set for a mode. For submanifold it is the input set; for
// strided2 the unique floor(site/2); inverse2 requires the recorded fine set.
std::vector<VoxelCoord> conv_output_sites(const std::vector<VoxelCoord>& in_sites,
                                          ConvMode mode);

ConvRulebook build_rulebook(const SparseVoxelTensor& input,
                            const std::vector<VoxelCoord>& out_sites,
                            const SiteIndex& out_index, ConvMode mode);

}  // namespace recon
