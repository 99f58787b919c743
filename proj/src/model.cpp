#include "recon/model.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "recon/errors.hpp"
#include "recon/rng.hpp"
#include "recon/tnsr.hpp"

namespace recon {

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

std::string join_int_list(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

ModelConfig ModelConfig::from_config(const Config& cfg) {
    ModelConfig m;
    m.w_lr = static_cast<int>(cfg.get_int("w_lr", m.w_lr));
    m.w_hr = static_cast<int>(cfg.get_int("w_hr", m.w_hr));
    m.fe_stacks = static_cast<int>(cfg.get_int("fe_stacks", m.fe_stacks));
    m.vfe_base = static_cast<int>(cfg.get_int("vfe_base", m.vfe_base));
    if (cfg.has("mlp_hidden")) m.mlp_hidden = parse_int_list(cfg.require_string("mlp_hidden"));
    m.voxel_spacing_norm = cfg.get_double("voxel_spacing_norm", m.voxel_spacing_norm);
    m.sigma_lr_norm = cfg.get_double("sigma_lr_norm", m.sigma_lr_norm);
    m.sigma_hr_norm = cfg.get_double("sigma_hr_norm", m.sigma_hr_norm);
    m.uniform_frac = cfg.get_double("uniform_frac", m.uniform_frac);
    m.n_k = static_cast<int>(cfg.get_int("n_k", m.n_k));
    m.delta = cfg.get_double("delta", m.delta);
    m.random_voxel_features = cfg.get_bool("random_voxel_features", m.random_voxel_features);
    return m;
}

Config ModelConfig::to_config() const {
    Config cfg;
    cfg.set("w_lr", w_lr);
    cfg.set("w_hr", w_hr);
    cfg.set("fe_stacks", fe_stacks);
    cfg.set("vfe_base", vfe_base);
    cfg.set("mlp_hidden", join_int_list(mlp_hidden));
    cfg.set("voxel_spacing_norm", voxel_spacing_norm);
    cfg.set("sigma_lr_norm", sigma_lr_norm);
    cfg.set("sigma_hr_norm", sigma_hr_norm);
    cfg.set("uniform_frac", uniform_frac);
    cfg.set("n_k", n_k);
    cfg.set("delta", delta);
    cfg.set("random_voxel_features", std::string(random_voxel_features ? "true" : "false"));
    return cfg;
}

ReconModel::ReconModel(const ModelConfig& cfg)
    : config(cfg),
      lr_fe(6, cfg.w_lr, 2, cfg.fe_stacks),
      hr_fe(6, cfg.w_hr, 1, cfg.fe_stacks),
      vfe(cfg.w_lr, cfg.vfe_base) {
    std::vector<int> widths;
    widths.push_back(cfg.mlp_in());
    for (int h : cfg.mlp_hidden) widths.push_back(h);
    widths.push_back(1);
    mlp = MlpParams(widths);
}

void init_model(ReconModel& model, uint64_t seed) {
    Rng rng(seed);
    auto he_fill = [&](std::vector<double>& w, int fan_in) {
        double s = std::sqrt(2.0 / fan_in);
        for (double& v : w) v = rng.normal(0, s);
    };
    for (auto& l : model.lr_fe.layers) he_fill(l.weights, 9 * l.c_in);
    for (auto& l : model.hr_fe.layers) he_fill(l.weights, 9 * l.c_in);
    for (auto& l : model.vfe.layers) he_fill(l.weights, 27 * l.c_in);
    for (size_t l = 0; l < model.mlp.weights.size(); ++l)
        he_fill(model.mlp.weights[l], model.mlp.widths[l]);
}

namespace {

template <typename FeLike, typename Push>
void walk_fe(const std::string& prefix, FeLike& fe, Push&& push) {
    for (size_t l = 0; l < fe.layers.size(); ++l) {
        push(prefix + ".l" + std::to_string(l) + ".weight", fe.layers[l].weights);
        push(prefix + ".l" + std::to_string(l) + ".bias", fe.layers[l].bias);
    }
}

}  // namespace

std::vector<TensorView> param_tensors(ReconModel& model) {
    std::vector<TensorView> out;
    auto push = [&](const std::string& name, std::vector<double>& v) {
        out.push_back({name, v.data(), v.size()});
    };
    walk_fe("lr_fe", model.lr_fe, push);
    walk_fe("hr_fe", model.hr_fe, push);
    walk_fe("vfe", model.vfe, push);
    for (size_t l = 0; l < model.mlp.weights.size(); ++l) {
        push("mlp.l" + std::to_string(l) + ".weight", model.mlp.weights[l]);
        push("mlp.l" + std::to_string(l) + ".bias", model.mlp.biases[l]);
    }
    return out;
}

std::vector<TensorView> grad_tensors(const ReconModel& model, ModelGradients& grads) {
    std::vector<TensorView> out;
    auto push_fe = [&](const std::string& prefix, const FeatureExtractorParams& fe,
                       FeGradients& g) {
        for (size_t l = 0; l < fe.layers.size(); ++l) {
            out.push_back({prefix + ".l" + std::to_string(l) + ".weight",
                           g.d_weights[l].data(), g.d_weights[l].size()});
            out.push_back({prefix + ".l" + std::to_string(l) + ".bias",
                           g.d_bias[l].data(), g.d_bias[l].size()});
        }
    };
    push_fe("lr_fe", model.lr_fe, grads.lr_fe);
    push_fe("hr_fe", model.hr_fe, grads.hr_fe);
    for (size_t l = 0; l < model.vfe.layers.size(); ++l) {
        out.push_back({"vfe.l" + std::to_string(l) + ".weight",
                       grads.vfe.d_weights[l].data(), grads.vfe.d_weights[l].size()});
        out.push_back({"vfe.l" + std::to_string(l) + ".bias", grads.vfe.d_bias[l].data(),
                       grads.vfe.d_bias[l].size()});
    }
    for (size_t l = 0; l < model.mlp.weights.size(); ++l) {
        out.push_back({"mlp.l" + std::to_string(l) + ".weight",
                       grads.mlp.d_weights[l].data(), grads.mlp.d_weights[l].size()});
        out.push_back({"mlp.l" + std::to_string(l) + ".bias", grads.mlp.d_biases[l].data(),
                       grads.mlp.d_biases[l].size()});
    }
    return out;
}

void save_checkpoint(const std::string& path, const ReconModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    std::string header = model.config.to_config().serialize();
    uint64_t header_len = header.size();
    out.write("RCHK", 4);
    out.write(reinterpret_cast<const char*>(&header_len), 8);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    ReconModel& m = const_cast<ReconModel&>(model);
    auto tensors = param_tensors(m);
    uint32_t count = static_cast<uint32_t>(tensors.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& t : tensors) {
        uint16_t name_len = static_cast<uint16_t>(t.name.size());
        out.write(reinterpret_cast<const char*>(&name_len), 2);
        out.write(t.name.data(), name_len);
        write_tnsr(out, tnsr_f64({static_cast<uint32_t>(t.size)},
                                 std::vector<double>(t.data, t.data + t.size)));
    }
    if (!out) throw DataError("checkpoint write failed: " + path);
}

ReconModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "RCHK", 4) != 0)
        throw DataError("bad checkpoint magic: " + path);
    uint64_t header_len;
    in.read(reinterpret_cast<char*>(&header_len), 8);
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw DataError("truncated checkpoint header: " + path);

    ReconModel model(ModelConfig::from_config(Config::parse(header)));
    auto tensors = param_tensors(model);
    uint32_t count;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (count != tensors.size())
        throw DataError("checkpoint tensor count mismatch: " + path);
    for (auto& t : tensors) {
        uint16_t name_len;
        in.read(reinterpret_cast<char*>(&name_len), 2);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (name != t.name) throw DataError("checkpoint tensor order mismatch: " + name);
        Tnsr blob = read_tnsr(in);
        if (blob.dtype != TnsrType::f64 || blob.f.size() != t.size)
            throw DataError("checkpoint tensor shape mismatch: " + name);
        std::copy(blob.f.begin(), blob.f.end(), t.data);
    }
    return model;
}

}  // namespace recon
