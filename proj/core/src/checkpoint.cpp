#include "ggs/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "ggs/tensor.hpp"

namespace ggs {

namespace {

constexpr char kMagic[8] = {'G', 'G', 'S', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
    char raw[8];
    std::memcpy(raw, &v, 8);
    buf.append(raw, 8);
}

void put_doubles(std::string& buf, const std::vector<double>& v) {
    put_u64(buf, v.size());
    buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw DataError("checkpoint truncated");
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }
    std::vector<double> doubles() {
        const std::uint64_t n = u64();
        need(n * sizeof(double));
        std::vector<double> v(n);
        std::memcpy(v.data(), buf.data() + pos, n * sizeof(double));
        pos += n * sizeof(double);
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 8);
    put_u64(buf, std::uint64_t(std::int64_t(ckpt.epoch)));

    const std::string cfg = train_config_to_json(ckpt.config);
    put_u64(buf, cfg.size());
    buf.append(cfg);

    put_u64(buf, ckpt.params.size());
    for (const auto& p : ckpt.params) put_doubles(buf, p);
    put_u64(buf, ckpt.velocity.size());
    for (const auto& v : ckpt.velocity) put_doubles(buf, v);

    put_u64(buf, hash_bytes(buf.data(), buf.size()));

    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw DataError("short write on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 8 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw DataError("'" + path + "' is not a checkpoint");

    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
    if (stored != hash_bytes(buf.data(), buf.size() - 8))
        throw DataError("checkpoint '" + path + "' failed its integrity check");

    Reader r{buf, 8};
    Checkpoint ckpt;
    ckpt.epoch = int(std::int64_t(r.u64()));
    const std::uint64_t cfg_len = r.u64();
    ckpt.config = train_config_from_json(r.bytes(cfg_len));

    const std::uint64_t np = r.u64();
    ckpt.params.reserve(np);
    for (std::uint64_t i = 0; i < np; ++i) ckpt.params.push_back(r.doubles());
    const std::uint64_t nv = r.u64();
    ckpt.velocity.reserve(nv);
    for (std::uint64_t i = 0; i < nv; ++i) ckpt.velocity.push_back(r.doubles());
    return ckpt;
}

std::vector<std::vector<double>> snapshot_params(const std::vector<Param*>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const Param* p : params) out.push_back(p->value);
    return out;
}

void restore_params(const std::vector<Param*>& params,
                    const std::vector<std::vector<double>>& values) {
    if (params.size() != values.size())
        throw DataError("checkpoint parameter count does not match the model");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->value.size() != values[i].size())
            throw DataError("checkpoint parameter shape does not match the model");
        params[i]->value = values[i];
    }
}

} // namespace ggs
