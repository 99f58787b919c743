#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "recon/rng.hpp"
#include "recon/sparse_conv.hpp"
#include "recon/vfe.hpp"

using namespace recon;

namespace {

double rel_err(double a, double b) {
    double denom = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / denom;
}

void fill_random(std::vector<double>& v, Rng& rng, double scale) {
    for (double& x : v) x = rng.normal(0, scale);
}

std::vector<VoxelCoord> block_sites(int n, const VoxelCoord& base = {0, 0, 0}) {
    std::vector<VoxelCoord> sites;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                sites.push_back({base[0] + x, base[1] + y, base[2] + z});
    return sites;
}

// Dense 3D correlation with zero padding, evaluated at one cell.
std::vector<double> dense_conv_at(const SparseVoxelTensor& x, const SparseConv& layer,
                                  const VoxelCoord& site) {
    std::vector<double> out(layer.bias);
    for (int k = 0; k < 27; ++k) {
        VoxelCoord d = {static_cast<int32_t>(k % 3 - 1), static_cast<int32_t>((k / 3) % 3 - 1),
                        static_cast<int32_t>(k / 9 - 1)};
        int i = x.index.find({site[0] + d[0], site[1] + d[1], site[2] + d[2]});
        if (i < 0) continue;
        const double* f = x.feature(i);
        for (int ci = 0; ci < layer.c_in; ++ci)
            for (int co = 0; co < layer.c_out; ++co)
                out[co] += layer.weights[(static_cast<size_t>(k) * layer.c_in + ci) *
                                             layer.c_out +
                                         co] *
                           f[ci];
    }
    return out;
}

double conv_probe_loss(const SparseVoxelTensor& x, const SparseConv& layer,
                       const std::vector<VoxelCoord>* target,
                       const std::vector<double>& probe) {
    SparseVoxelTensor y = sparse_conv_forward(x, layer, target, nullptr);
    double loss = 0;
    for (size_t i = 0; i < y.features.size(); ++i) loss += y.features[i] * probe[i];
    return loss;
}

}  // namespace

TEST_CASE("sparse tensor canonicalization and index") {
    std::vector<VoxelCoord> sites = {{2, 0, 0}, {0, 0, 0}, {2, 0, 0}, {-1, 3, 2}};
    SparseVoxelTensor t = make_sparse_tensor(sites, 2);
    REQUIRE(t.site_count() == 3);
    CHECK(t.sites[0] == VoxelCoord{-1, 3, 2});
    CHECK(t.sites[2] == VoxelCoord{2, 0, 0});
    CHECK(t.index.find({0, 0, 0}) == 1);
    CHECK(t.index.find({5, 5, 5}) == -1);
    SparseVoxelTensor z = t.like(4);
    CHECK(z.channels == 4);
    CHECK(z.sites == t.sites);
    for (double v : z.features) CHECK(v == 0.0);
}

TEST_CASE("conv output site sets per mode") {
    std::vector<VoxelCoord> sites = {{0, 0, 0}, {1, 0, 0}, {-1, -1, 0}, {3, 2, 1}};
    CHECK(conv_output_sites(sites, ConvMode::submanifold) == sites);
    auto coarse = conv_output_sites(sites, ConvMode::strided2);
    std::vector<VoxelCoord> want = {{-1, -1, 0}, {0, 0, 0}, {1, 1, 0}};
    CHECK(coarse == want);
    CHECK_THROWS_AS(conv_output_sites(sites, ConvMode::inverse2), StateError);
}

TEST_CASE("identity kernel submanifold conv is the identity") {
    Rng rng(2);
    SparseVoxelTensor x = make_sparse_tensor(block_sites(3), 3);
    fill_random(x.features, rng, 1.0);
    SparseConv layer(3, 3, ConvMode::submanifold);
    for (int c = 0; c < 3; ++c)
        layer.weights[(13ull * 3 + c) * 3 + c] = 1.0;  // center tap only
    SparseVoxelTensor y = sparse_conv_forward(x, layer, nullptr, nullptr);
    REQUIRE(y.features.size() == x.features.size());
    for (size_t i = 0; i < y.features.size(); ++i)
        CHECK(y.features[i] == doctest::Approx(x.features[i]));
}

TEST_CASE("isolated site only sees its center tap") {
    Rng rng(3);
    SparseVoxelTensor x = make_sparse_tensor({{5, 5, 5}}, 2);
    fill_random(x.features, rng, 1.0);
    SparseConv layer(2, 4, ConvMode::submanifold);
    fill_random(layer.weights, rng, 1.0);
    fill_random(layer.bias, rng, 1.0);
    SparseVoxelTensor y = sparse_conv_forward(x, layer, nullptr, nullptr);
    for (int co = 0; co < 4; ++co) {
        double want = layer.bias[co];
        for (int ci = 0; ci < 2; ++ci)
            want += layer.weights[(13ull * 2 + ci) * 4 + co] * x.feature(0)[ci];
        CHECK(y.feature(0)[co] == doctest::Approx(want));
    }
}

TEST_CASE("submanifold conv matches dense convolution on occupied blocks") {
    Rng rng(5);
    for (int n : {4, 6, 8}) {
        SparseVoxelTensor x = make_sparse_tensor(block_sites(n), 3);
        fill_random(x.features, rng, 1.0);
        SparseConv layer(3, 2, ConvMode::submanifold);
        fill_random(layer.weights, rng, 0.5);
        fill_random(layer.bias, rng, 0.5);
        SparseVoxelTensor y = sparse_conv_forward(x, layer, nullptr, nullptr);
        for (size_t s = 0; s < y.site_count(); ++s) {
            std::vector<double> want = dense_conv_at(x, layer, y.sites[s]);
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(y.feature(s)[c] - want[c]) <= 1e-6);
        }
    }
}

TEST_CASE("sparse conv is linear in its input") {
    Rng rng(7);
    SparseVoxelTensor x = make_sparse_tensor(block_sites(4), 2);
    SparseVoxelTensor y = x.like(2);
    fill_random(x.features, rng, 1.0);
    fill_random(y.features, rng, 1.0);
    SparseConv layer(2, 3, ConvMode::submanifold);
    fill_random(layer.weights, rng, 0.7);

    SparseVoxelTensor mix = x.like(2);
    for (size_t i = 0; i < mix.features.size(); ++i)
        mix.features[i] = 2.5 * x.features[i] - 0.75 * y.features[i];
    SparseVoxelTensor out_mix = sparse_conv_forward(mix, layer, nullptr, nullptr);
    SparseVoxelTensor out_x = sparse_conv_forward(x, layer, nullptr, nullptr);
    SparseVoxelTensor out_y = sparse_conv_forward(y, layer, nullptr, nullptr);
    for (size_t i = 0; i < out_mix.features.size(); ++i)
        CHECK(std::abs(out_mix.features[i] -
                       (2.5 * out_x.features[i] - 0.75 * out_y.features[i])) <= 1e-6);
}

TEST_CASE("strided2 then inverse2 restores the fine site set") {
    std::vector<VoxelCoord> fine = {{0, 0, 0}, {1, 2, 3}, {-2, 1, 0}, {4, 4, 4}, {5, 4, 4}};
    SparseVoxelTensor x = make_sparse_tensor(fine, 2);
    SparseConv down(2, 2, ConvMode::strided2);
    SparseConv up(2, 2, ConvMode::inverse2);
    SparseVoxelTensor coarse = sparse_conv_forward(x, down, nullptr, nullptr);
    CHECK(coarse.stride == 2);
    SparseVoxelTensor back = sparse_conv_forward(coarse, up, &x.sites, nullptr);
    CHECK(back.stride == 1);
    CHECK(back.sites == x.sites);
}

TEST_CASE("sparse conv gradients match finite differences in all modes") {
    Rng rng(11);
    std::vector<VoxelCoord> fine = block_sites(3);
    fine.push_back({4, 1, 0});
    fine.push_back({-1, 2, 2});

    for (ConvMode mode : {ConvMode::submanifold, ConvMode::strided2, ConvMode::inverse2}) {
        SparseVoxelTensor x =
            mode == ConvMode::inverse2
                ? make_sparse_tensor(conv_output_sites(fine, ConvMode::strided2), 2, 2)
                : make_sparse_tensor(fine, 2);
        fill_random(x.features, rng, 1.0);
        SparseConv layer(2, 3, mode);
        fill_random(layer.weights, rng, 0.6);
        fill_random(layer.bias, rng, 0.6);
        const std::vector<VoxelCoord>* target = mode == ConvMode::inverse2 ? &fine : nullptr;

        SparseConvContext ctx;
        SparseVoxelTensor out = sparse_conv_forward(x, layer, target, &ctx);
        std::vector<double> probe(out.features.size());
        fill_random(probe, rng, 1.0);

        SparseVoxelTensor d_out = out.like(out.channels);
        d_out.features = probe;
        std::vector<double> d_w(layer.weights.size(), 0.0), d_b(layer.bias.size(), 0.0);
        SparseVoxelTensor d_in = sparse_conv_backward(ctx, layer, d_out, d_w, d_b);

        const double h = 1e-6;
        for (int trial = 0; trial < 20; ++trial) {
            size_t wi = rng.uniform_index(layer.weights.size());
            double keep = layer.weights[wi];
            layer.weights[wi] = keep + h;
            double up_loss = conv_probe_loss(x, layer, target, probe);
            layer.weights[wi] = keep - h;
            double dn_loss = conv_probe_loss(x, layer, target, probe);
            layer.weights[wi] = keep;
            CHECK(rel_err(d_w[wi], (up_loss - dn_loss) / (2 * h)) <= 1e-4);
        }
        for (int trial = 0; trial < 10; ++trial) {
            size_t xi = rng.uniform_index(x.features.size());
            double keep = x.features[xi];
            x.features[xi] = keep + h;
            double up_loss = conv_probe_loss(x, layer, target, probe);
            x.features[xi] = keep - h;
            double dn_loss = conv_probe_loss(x, layer, target, probe);
            x.features[xi] = keep;
            CHECK(rel_err(d_in.features[xi], (up_loss - dn_loss) / (2 * h)) <= 1e-4);
        }
        for (size_t bi = 0; bi < layer.bias.size(); ++bi) {
            double keep = layer.bias[bi];
            layer.bias[bi] = keep + h;
            double up_loss = conv_probe_loss(x, layer, target, probe);
            layer.bias[bi] = keep - h;
            double dn_loss = conv_probe_loss(x, layer, target, probe);
            layer.bias[bi] = keep;
            CHECK(rel_err(d_b[bi], (up_loss - dn_loss) / (2 * h)) <= 1e-4);
        }
    }
}

namespace {

VfeParams random_vfe(int in_channels, int base, Rng& rng) {
    VfeParams params(in_channels, base);
    for (auto& l : params.layers) {
        fill_random(l.weights, rng, std::sqrt(2.0 / (27.0 * l.c_in)) * 0.5);
        fill_random(l.bias, rng, 0.05);
    }
    return params;
}

double vfe_probe_loss(const SparseVoxelTensor& x, const VfeParams& params,
                      const std::array<std::vector<double>, 3>& probes) {
    CodeVolumes codes = vfe_forward(x, params, Vec3::Zero(), 1.0, nullptr);
    double loss = 0;
    for (int l = 0; l < 3; ++l)
        for (size_t i = 0; i < codes.levels[l].features.size(); ++i)
            loss += codes.levels[l].features[i] * probes[l][i];
    return loss;
}

}  // namespace

TEST_CASE("vfe shapes, zero weights and site preservation") {
    VfeParams params(4, 2);
    REQUIRE(params.layers.size() == 28);
    CHECK(params.code_channels() == 2 + 4 + 8);

    SparseVoxelTensor x = make_sparse_tensor(block_sites(5), 4);
    Rng rng(13);
    fill_random(x.features, rng, 1.0);

    CodeVolumes codes = vfe_forward(x, params, Vec3(0.5, 0, 0), 0.25, nullptr);
    CHECK(codes.levels[0].channels == 2);
    CHECK(codes.levels[1].channels == 4);
    CHECK(codes.levels[2].channels == 8);
    CHECK(codes.levels[0].stride == 1);
    CHECK(codes.levels[1].stride == 2);
    CHECK(codes.levels[2].stride == 4);
    CHECK(codes.levels[0].sites == x.sites);
    CHECK(codes.origin == Vec3(0.5, 0, 0));
    CHECK(codes.spacing == 0.25);
    // All-zero parameters give all-zero codes.
    for (int l = 0; l < 3; ++l)
        for (double v : codes.levels[l].features) CHECK(v == 0.0);
}

TEST_CASE("vfe gradients match finite differences") {
    Rng rng(17);
    VfeParams params = random_vfe(3, 2, rng);
    SparseVoxelTensor x = make_sparse_tensor(block_sites(4), 3);
    fill_random(x.features, rng, 1.0);

    VfeActivations acts;
    CodeVolumes codes = vfe_forward(x, params, Vec3::Zero(), 1.0, &acts);
    std::array<std::vector<double>, 3> probes;
    std::array<SparseVoxelTensor, 3> d_codes;
    for (int l = 0; l < 3; ++l) {
        probes[l].resize(codes.levels[l].features.size());
        fill_random(probes[l], rng, 1.0);
        d_codes[l] = codes.levels[l].like(codes.levels[l].channels);
        d_codes[l].features = probes[l];
    }
    VfeGradients grads(params);
    SparseVoxelTensor d_in = vfe_backward(params, acts, d_codes, grads);

    const double h = 1e-6;
    // Spot-check weights spread across the depth of the network.
    for (size_t layer : {0ul, 4ul, 7ul, 11ul, 15ul, 16ul, 21ul, 25ul, 27ul}) {
        for (int trial = 0; trial < 3; ++trial) {
            size_t wi = rng.uniform_index(params.layers[layer].weights.size());
            double keep = params.layers[layer].weights[wi];
            params.layers[layer].weights[wi] = keep + h;
            double up = vfe_probe_loss(x, params, probes);
            params.layers[layer].weights[wi] = keep - h;
            double dn = vfe_probe_loss(x, params, probes);
            params.layers[layer].weights[wi] = keep;
            CHECK(rel_err(grads.d_weights[layer][wi], (up - dn) / (2 * h)) <= 1e-4);
        }
    }
    for (int trial = 0; trial < 10; ++trial) {
        size_t xi = rng.uniform_index(x.features.size());
        double keep = x.features[xi];
        x.features[xi] = keep + h;
        double up = vfe_probe_loss(x, params, probes);
        x.features[xi] = keep - h;
        double dn = vfe_probe_loss(x, params, probes);
        x.features[xi] = keep;
        CHECK(rel_err(d_in.features[xi], (up - dn) / (2 * h)) <= 1e-4);
    }
}

namespace {

// Brute-force trilinear blend at one level with zero fill.
std::vector<double> trilinear_oracle_level(const SparseVoxelTensor& level,
                                           const Vec3& origin, double spacing,
                                           const Vec3& p) {
    double cell = spacing * level.stride;
    Vec3 g = (p - origin) / cell - Vec3::Constant(0.5);
    Vec3 base(std::floor(g.x()), std::floor(g.y()), std::floor(g.z()));
    Vec3 frac = g - base;
    std::vector<double> out(level.channels, 0.0);
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                double w = (dx ? frac.x() : 1 - frac.x()) * (dy ? frac.y() : 1 - frac.y()) *
                           (dz ? frac.z() : 1 - frac.z());
                VoxelCoord c = {static_cast<int32_t>(base.x()) + dx,
                                static_cast<int32_t>(base.y()) + dy,
                                static_cast<int32_t>(base.z()) + dz};
                int i = level.index.find(c);
                if (i < 0) continue;
                for (int ch = 0; ch < level.channels; ++ch) out[ch] += w * level.feature(i)[ch];
            }
    return out;
}

}  // namespace

TEST_CASE("trilinear query matches the brute-force oracle") {
    Rng rng(23);
    VfeParams params = random_vfe(3, 2, rng);
    SparseVoxelTensor x = make_sparse_tensor(block_sites(4), 3);
    fill_random(x.features, rng, 1.0);
    Vec3 origin(0.2, -0.1, 0.05);
    double spacing = 0.3;
    CodeVolumes codes = vfe_forward(x, params, origin, spacing, nullptr);

    std::vector<double> got(codes.total_channels());
    for (int trial = 0; trial < 200; ++trial) {
        Vec3 p = origin + Vec3(rng.uniform(-1, 3), rng.uniform(-1, 3), rng.uniform(-1, 3));
        trilinear_query(codes, p, got.data());
        size_t off = 0;
        for (int l = 0; l < 3; ++l) {
            auto want = trilinear_oracle_level(codes.levels[l], origin, spacing, p);
            for (int c = 0; c < codes.levels[l].channels; ++c)
                CHECK(std::abs(got[off + c] - want[c]) <= 1e-7);
            off += codes.levels[l].channels;
        }
    }

    // At an active stride-1 site center the level-0 block is that site's code.
    VoxelCoord site = codes.levels[0].sites[7];
    Vec3 center = origin + spacing * Vec3(site[0] + 0.5, site[1] + 0.5, site[2] + 0.5);
    trilinear_query(codes, center, got.data());
    int idx = codes.levels[0].index.find(site);
    for (int c = 0; c < codes.levels[0].channels; ++c)
        CHECK(got[c] == doctest::Approx(codes.levels[0].feature(idx)[c]));

    // Far away from every site the query is zero.
    trilinear_query(codes, origin + Vec3(100, 100, 100), got.data());
    for (double v : got) CHECK(v == 0.0);
}

TEST_CASE("trilinear backward is the adjoint of the query") {
    Rng rng(29);
    VfeParams params = random_vfe(2, 2, rng);
    SparseVoxelTensor x = make_sparse_tensor(block_sites(3), 2);
    fill_random(x.features, rng, 1.0);
    CodeVolumes codes = vfe_forward(x, params, Vec3::Zero(), 0.5, nullptr);

    int total = codes.total_channels();
    for (int trial = 0; trial < 40; ++trial) {
        Vec3 p(rng.uniform(-0.5, 2), rng.uniform(-0.5, 2), rng.uniform(-0.5, 2));
        std::vector<double> d_out(total);
        fill_random(d_out, rng, 1.0);
        std::vector<double> y(total);
        trilinear_query(codes, p, y.data());
        double lhs = 0;
        for (int c = 0; c < total; ++c) lhs += y[c] * d_out[c];

        std::array<SparseVoxelTensor, 3> d_levels;
        for (int l = 0; l < 3; ++l) d_levels[l] = codes.levels[l].like(codes.levels[l].channels);
        trilinear_query_backward(codes, p, d_out.data(), d_levels);
        double rhs = 0;
        for (int l = 0; l < 3; ++l)
            for (size_t i = 0; i < d_levels[l].features.size(); ++i)
                rhs += d_levels[l].features[i] * codes.levels[l].features[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}
