#include "cyanocast/checkpoint.hpp"

#include <cstring>

#include "cyanocast/errors.hpp"
#include "cyanocast/text_io.hpp"

namespace cyano {

namespace {

constexpr char kMagic[8] = {'C', 'Y', 'A', 'N', 'O', 'C', 'K', '1'};

template <typename T>
void put(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off, const std::string& origin) {
    if (off + sizeof(T) > in.size())
        throw DataError(origin + ": truncated checkpoint file");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

void put_i32(std::string& out, int v) {
    put<std::int32_t>(out, static_cast<std::int32_t>(v));
}

int take_i32(const std::string& in, std::size_t& off,
             const std::string& origin) {
    return static_cast<int>(take<std::int32_t>(in, off, origin));
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model,
                     const NormStats& norm) {
    const ModelConfig& cfg = model.cfg;
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, 1);  // format version

    put_i32(out, cfg.seq_len);
    put_i32(out, cfg.features);
    put_i32(out, cfg.horizon);
    put_i32(out, cfg.classes);
    put_i32(out, cfg.d_model);
    put_i32(out, cfg.heads);
    for (int h : cfg.snb_hidden) put_i32(out, h);
    put_i32(out, cfg.lstm_hidden);
    put<double>(out, cfg.dropout);
    put<double>(out, cfg.leaky_slope);

    for (double v : norm.mean) put<double>(out, v);
    for (double v : norm.stdev) put<double>(out, v);

    const auto named = model.named_parameters();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
    for (const auto& [name, tensor] : named) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.append(name);
        put_i32(out, tensor->rows);
        put_i32(out, tensor->cols);
        for (double v : tensor->value) put<double>(out, v);
    }

    atomic_write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::string in = read_file(path);
    std::size_t off = 0;
    if (in.size() < sizeof(kMagic) ||
        std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError(path + ": not a checkpoint file");
    off = sizeof(kMagic);
    if (take<std::uint32_t>(in, off, path) != 1)
        throw DataError(path + ": unsupported checkpoint version");

    ModelConfig cfg;
    cfg.seq_len = take_i32(in, off, path);
    cfg.features = take_i32(in, off, path);
    cfg.horizon = take_i32(in, off, path);
    cfg.classes = take_i32(in, off, path);
    cfg.d_model = take_i32(in, off, path);
    cfg.heads = take_i32(in, off, path);
    for (int& h : cfg.snb_hidden) h = take_i32(in, off, path);
    cfg.lstm_hidden = take_i32(in, off, path);
    cfg.dropout = take<double>(in, off, path);
    cfg.leaky_slope = take<double>(in, off, path);
    cfg.validate();

    NormStats norm;
    for (double& v : norm.mean) v = take<double>(in, off, path);
    for (double& v : norm.stdev) v = take<double>(in, off, path);

    Checkpoint ck{cfg, norm, Model::init(cfg, 0)};
    const auto named = ck.model.named_parameters();
    const auto count = take<std::uint32_t>(in, off, path);
    if (count != named.size())
        throw DataError(path + ": parameter count mismatch");
    for (const auto& [name, tensor] : named) {
        const auto len = take<std::uint16_t>(in, off, path);
        if (off + len > in.size())
            throw DataError(path + ": truncated checkpoint file");
        if (in.compare(off, len, name) != 0)
            throw DataError(path + ": parameter order mismatch at " + name);
        off += len;
        const int rows = take_i32(in, off, path);
        const int cols = take_i32(in, off, path);
        if (rows != tensor->rows || cols != tensor->cols)
            throw DataError(path + ": shape mismatch for " + name);
        for (double& v : tensor->value) v = take<double>(in, off, path);
    }
    if (off != in.size())
        throw DataError(path + ": trailing bytes after checkpoint payload");
    return ck;
}

}  // namespace cyano
