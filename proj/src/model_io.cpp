#include "sd/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sd/error.hpp"

namespace sd {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'D', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(void* dst, std::size_t n) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        const auto got = static_cast<std::size_t>(in_.gcount());
        if (got != n)
            throw FormatError("truncated model: expected " + std::to_string(n) + " bytes, got " + std::to_string(got),
                              offset_ + got);
        offset_ += n;
    }
    template <typename T>
    T get() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
    std::uint64_t offset() const { return offset_; }

  private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

} // namespace

void write_model(const ModelParams<float>& params, std::ostream& sink) {
    params.cfg.validate();
    sink.write(kMagic, 4);
    put(sink, kVersion);
    put(sink, params.cfg.in_channels);
    put(sink, params.cfg.n_classes);
    put(sink, params.cfg.base_filters);
    put(sink, params.cfg.kernel_size);
    put(sink, params.cfg.depth);
    put(sink, params.cfg.dropout);
    put(sink, static_cast<std::uint32_t>(params.tensors.size()));
    for (std::size_t k = 0; k < params.tensors.size(); ++k) {
        const auto& name = params.names[k];
        const auto& t = params.tensors[k];
        put(sink, static_cast<std::uint16_t>(name.size()));
        sink.write(name.data(), static_cast<std::streamsize>(name.size()));
        put(sink, static_cast<std::uint8_t>(t.shape.size()));
        for (auto d : t.shape) put(sink, d);
        sink.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
    }
    if (!sink) throw IoError("failed writing model");
}

ModelParams<float> read_model(std::istream& source) {
    Reader r(source);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic: not an SDNN model", 0);
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) throw FormatError("unsupported model version " + std::to_string(version), 4);
    UNetConfig cfg;
    cfg.in_channels = r.get<std::uint32_t>();
    cfg.n_classes = r.get<std::uint32_t>();
    cfg.base_filters = r.get<std::uint32_t>();
    cfg.kernel_size = r.get<std::uint32_t>();
    cfg.depth = r.get<std::uint32_t>();
    cfg.dropout = r.get<float>();
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("invalid model config: ") + e.what(), r.offset());
    }
    const auto layout = unet_layout(cfg);
    const auto count = r.get<std::uint32_t>();
    if (count != 2 * layout.size())
        throw FormatError("tensor count " + std::to_string(count) + " does not match the configuration", r.offset());

    ModelParams<float> p;
    p.cfg = cfg;
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto& layer = layout[k / 2];
        const bool is_weight = k % 2 == 0;
        const std::string expect_name = layer.name + (is_weight ? ".weight" : ".bias");
        const std::vector<std::uint32_t> expect_shape =
            is_weight ? std::vector<std::uint32_t>{layer.out, layer.in, layer.kernel, layer.kernel}
                      : std::vector<std::uint32_t>{layer.out};

        const auto at = r.offset();
        std::string name(r.get<std::uint16_t>(), '\0');
        r.bytes(name.data(), name.size());
        if (name != expect_name) throw FormatError("unexpected tensor '" + name + "', expected " + expect_name, at);
        std::vector<std::uint32_t> shape(r.get<std::uint8_t>());
        for (auto& d : shape) d = r.get<std::uint32_t>();
        if (shape != expect_shape) throw FormatError("shape mismatch for tensor " + name, at);
        Tensor<float> t(shape);
        r.bytes(t.data(), t.size() * sizeof(float));
        p.names.push_back(std::move(name));
        p.tensors.push_back(std::move(t));
    }
    return p;
}

void save_model(const ModelParams<float>& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_model(params, out);
}

ModelParams<float> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_model(in);
}

} // namespace sd
