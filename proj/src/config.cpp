#include "ctlab/config.hpp"

#include "ctlab/csv.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ctlab {

Dataset RunConfig::make_dataset() const {
    return Dataset(dataset, OutlierSpec{outlier_p, outlier_amplitude});
}

ModelConfig RunConfig::model_config() const {
    ModelConfig mc;
    mc.data_dim = Dataset::kDim;
    mc.hidden = hidden;
    mc.blocks = blocks;
    mc.time_freqs = time_freqs;
    mc.time_scale = time_scale;
    mc.norm_kind = norm;
    mc.gn_groups = gn_groups;
    mc.in_channels = in_channels;
    mc.norm_eps = norm_eps;
    mc.dropout = dropout;
    mc.sigma_data = sigma_data;
    mc.sigma_min = t_min;
    mc.init_seed = mix_seed(seed, 3);
    return mc;
}

Curriculum RunConfig::curriculum() const { return Curriculum{s0, s1, total_iters}; }

CScheduler RunConfig::c_scheduler() const {
    if (c_mode == CMode::Adaptive) return CScheduler::adaptive();
    return c0 > 0.0 ? CScheduler::fixed(c0) : CScheduler::fixed_default();
}

LossSpec RunConfig::loss_spec() const { return LossSpec{loss, c_scheduler()}; }

DiffusionRegularizer RunConfig::diffusion() const {
    return DiffusionRegularizer{diffusion_r, diffusion_enabled};
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

template <typename T>
T parse_num(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out;
    ss >> out;
    if (ss.fail() || !ss.eof())
        throw std::invalid_argument("config: bad value for " + key + ": " + v);
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "dataset") cfg.dataset = dataset_kind_from_name(val);
        else if (key == "outlier_p") cfg.outlier_p = parse_num<double>(val, key);
        else if (key == "outlier_amplitude") cfg.outlier_amplitude = parse_num<double>(val, key);
        else if (key == "loss") cfg.loss = loss_kind_from_name(val);
        else if (key == "c_mode") {
            if (val == "adaptive") cfg.c_mode = CMode::Adaptive;
            else if (val == "fixed") cfg.c_mode = CMode::Fixed;
            else throw std::invalid_argument("config: bad c_mode: " + val);
        }
        else if (key == "c0") cfg.c0 = parse_num<double>(val, key);
        else if (key == "coupling") cfg.coupling = coupling_mode_from_name(val);
        else if (key == "diffusion_enabled") cfg.diffusion_enabled = parse_bool(val, key);
        else if (key == "diffusion_r") cfg.diffusion_r = parse_num<double>(val, key);
        else if (key == "diffusion_weight") cfg.diffusion_weight = parse_num<double>(val, key);
        else if (key == "s0") cfg.s0 = parse_num<std::size_t>(val, key);
        else if (key == "s1") cfg.s1 = parse_num<std::size_t>(val, key);
        else if (key == "total_iters") cfg.total_iters = parse_num<std::size_t>(val, key);
        else if (key == "t_min") cfg.t_min = parse_num<double>(val, key);
        else if (key == "t_max") cfg.t_max = parse_num<double>(val, key);
        else if (key == "rho") cfg.rho = parse_num<double>(val, key);
        else if (key == "timestep_mode") {
            if (val == "lognormal") cfg.timestep_mode = TimestepMode::DiscreteLognormal;
            else if (val == "uniform") cfg.timestep_mode = TimestepMode::Uniform;
            else throw std::invalid_argument("config: bad timestep_mode: " + val);
        }
        else if (key == "p_mean") cfg.p_mean = parse_num<double>(val, key);
        else if (key == "p_std") cfg.p_std = parse_num<double>(val, key);
        else if (key == "hidden") cfg.hidden = parse_num<std::size_t>(val, key);
        else if (key == "blocks") cfg.blocks = parse_num<std::size_t>(val, key);
        else if (key == "time_freqs") cfg.time_freqs = parse_num<std::size_t>(val, key);
        else if (key == "time_scale") cfg.time_scale = parse_num<double>(val, key);
        else if (key == "norm") cfg.norm = norm_kind_from_name(val);
        else if (key == "gn_groups") cfg.gn_groups = parse_num<std::size_t>(val, key);
        else if (key == "in_channels") cfg.in_channels = parse_num<std::size_t>(val, key);
        else if (key == "norm_eps") cfg.norm_eps = parse_num<double>(val, key);
        else if (key == "dropout") cfg.dropout = parse_num<double>(val, key);
        else if (key == "sigma_data") cfg.sigma_data = parse_num<double>(val, key);
        else if (key == "learning_rate") cfg.learning_rate = parse_num<double>(val, key);
        else if (key == "batch_size") cfg.batch_size = parse_num<std::size_t>(val, key);
        else if (key == "ema_mu") cfg.ema_mu = parse_num<double>(val, key);
        else if (key == "seed") cfg.seed = parse_num<std::uint64_t>(val, key);
        else if (key == "td_capture_every") cfg.td_capture_every = parse_num<std::size_t>(val, key);
        else if (key == "log_every") cfg.log_every = parse_num<std::size_t>(val, key);
        else if (key == "checkpoint_every") cfg.checkpoint_every = parse_num<std::size_t>(val, key);
        else throw std::invalid_argument("config line " + std::to_string(line_no) +
                                         ": unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto num = [](double v) { return csv::format_double(v); };
    out << "dataset = " << dataset_kind_name(cfg.dataset) << "\n";
    out << "outlier_p = " << num(cfg.outlier_p) << "\n";
    out << "outlier_amplitude = " << num(cfg.outlier_amplitude) << "\n";
    out << "loss = " << loss_kind_name(cfg.loss) << "\n";
    out << "c_mode = " << (cfg.c_mode == CMode::Adaptive ? "adaptive" : "fixed") << "\n";
    out << "c0 = " << num(cfg.c0) << "\n";
    out << "coupling = " << coupling_mode_name(cfg.coupling) << "\n";
    out << "diffusion_enabled = " << (cfg.diffusion_enabled ? "true" : "false") << "\n";
    out << "diffusion_r = " << num(cfg.diffusion_r) << "\n";
    out << "diffusion_weight = " << num(cfg.diffusion_weight) << "\n";
    out << "s0 = " << cfg.s0 << "\n";
    out << "s1 = " << cfg.s1 << "\n";
    out << "total_iters = " << cfg.total_iters << "\n";
    out << "t_min = " << num(cfg.t_min) << "\n";
    out << "t_max = " << num(cfg.t_max) << "\n";
    out << "rho = " << num(cfg.rho) << "\n";
    out << "timestep_mode = "
        << (cfg.timestep_mode == TimestepMode::DiscreteLognormal ? "lognormal" : "uniform")
        << "\n";
    out << "p_mean = " << num(cfg.p_mean) << "\n";
    out << "p_std = " << num(cfg.p_std) << "\n";
    out << "hidden = " << cfg.hidden << "\n";
    out << "blocks = " << cfg.blocks << "\n";
    out << "time_freqs = " << cfg.time_freqs << "\n";
    out << "time_scale = " << num(cfg.time_scale) << "\n";
    out << "norm = " << norm_kind_name(cfg.norm) << "\n";
    out << "gn_groups = " << cfg.gn_groups << "\n";
    out << "in_channels = " << cfg.in_channels << "\n";
    out << "norm_eps = " << num(cfg.norm_eps) << "\n";
    out << "dropout = " << num(cfg.dropout) << "\n";
    out << "sigma_data = " << num(cfg.sigma_data) << "\n";
    out << "learning_rate = " << num(cfg.learning_rate) << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "ema_mu = " << num(cfg.ema_mu) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "td_capture_every = " << cfg.td_capture_every << "\n";
    out << "log_every = " << cfg.log_every << "\n";
    out << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    return out.str();
}

std::uint64_t bytes_hash(const void* data, std::size_t len, std::uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t config_digest(const RunConfig& cfg) {
    const std::string text = serialize_run_config(cfg);
    return bytes_hash(text.data(), text.size());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'T', 'L', 'A', 'B', 'C', 'K', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v, const std::string& path) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
}

}  // namespace

void save_checkpoint(const std::string& path, const RunConfig& cfg,
                     const ConsistencyModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, kCheckpointVersion);
    write_pod(out, config_digest(cfg));
    const std::string text = serialize_run_config(cfg);
    write_pod(out, (std::uint64_t)text.size());
    out.write(text.data(), (std::streamsize)text.size());
    const std::vector<double> flat = model.flatten_params();
    write_pod(out, (std::uint64_t)flat.size());
    out.write(reinterpret_cast<const char*>(flat.data()),
              (std::streamsize)(flat.size() * sizeof(double)));
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    read_pod(in, version, path);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " +
                                 std::to_string(version) + " in " + path);
    std::uint64_t digest = 0;
    read_pod(in, digest, path);
    std::uint64_t text_len = 0;
    read_pod(in, text_len, path);
    std::string text(text_len, '\0');
    in.read(text.data(), (std::streamsize)text_len);
    if (!in) throw std::runtime_error("checkpoint: truncated config in " + path);

    Checkpoint ck;
    ck.config = parse_run_config(text);
    if (config_digest(ck.config) != digest)
        throw std::runtime_error("checkpoint: config digest mismatch in " + path);

    std::uint64_t count = 0;
    read_pod(in, count, path);
    ck.params.resize(count);
    in.read(reinterpret_cast<char*>(ck.params.data()),
            (std::streamsize)(count * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated payload in " + path);
    return ck;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        h = bytes_hash(buf, (std::size_t)in.gcount(), h);
    }
    return h;
}

void write_manifest(const std::string& dir, const RunConfig& cfg,
                    const std::vector<std::string>& artifacts) {
    write_manifest(dir, config_digest(cfg), cfg.seed, artifacts);
}

void write_manifest(const std::string& dir, std::uint64_t digest, std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
    namespace fs = std::filesystem;
    std::ofstream out(fs::path(dir) / "manifest.txt");
    if (!out) throw std::runtime_error("manifest: cannot write in " + dir);
    out << "config_digest = " << hex64(digest) << "\n";
    out << "seed = " << seed << "\n";
    for (const auto& rel : artifacts) {
        const fs::path p = fs::path(dir) / rel;
        out << "artifact = " << rel << " " << hex64(file_hash(p.string())) << "\n";
    }
}

}  // namespace ctlab
