#include "sd/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sd/error.hpp"

namespace sd {

static_assert(std::endian::native == std::endian::little, "SDGR I/O assumes a little-endian host");

void GridSpec::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ArgumentError("grid cell_size must be > 0");
    if (width < 1 || height < 1) throw ArgumentError("grid width and height must be >= 1");
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw ArgumentError("grid origin must be finite");
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> GridSpec::cell_of(double x, double y) const {
    const double fc = std::floor((x - origin_x) / cell_size);
    const double fr = std::floor((origin_y - y) / cell_size);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < width && fr < height)) return std::nullopt;
    return std::make_pair(static_cast<std::uint32_t>(fr), static_cast<std::uint32_t>(fc));
}

GeoGrid::GeoGrid(const GridSpec& spec, std::uint16_t channels, DType dtype, std::vector<std::string> channel_names)
    : spec_(spec), channels_(channels), dtype_(dtype), names_(std::move(channel_names)) {
    spec_.validate();
    if (channels_ < 1) throw ArgumentError("grid needs at least one channel");
    if (names_.empty()) {
        for (std::uint16_t c = 0; c < channels_; ++c) names_.push_back("band" + std::to_string(c + 1));
    }
    if (names_.size() != channels_) throw ArgumentError("channel name count does not match channel count");
    for (const auto& n : names_) {
        if (n.size() > 255) throw ArgumentError("channel name longer than 255 bytes");
    }
    data_.assign(spec_.pixel_count() * channels_, 0.0f);
}

std::span<float> GeoGrid::channel(std::uint16_t c) {
    return std::span<float>(data_).subspan(static_cast<std::size_t>(c) * spec_.pixel_count(), spec_.pixel_count());
}

std::span<const float> GeoGrid::channel(std::uint16_t c) const {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(c) * spec_.pixel_count(),
                                                 spec_.pixel_count());
}

void GeoGrid::set_nodata(std::uint32_t row, std::uint32_t col, bool flag) {
    if (!nodata_) {
        if (!flag) return;
        nodata_.emplace(spec_.pixel_count(), 0);
    }
    (*nodata_)[static_cast<std::size_t>(row) * spec_.width + col] = flag ? 1 : 0;
}

void GeoGrid::set_nodata_mask(std::vector<std::uint8_t> mask) {
    if (mask.size() != spec_.pixel_count()) throw ArgumentError("nodata mask size does not match grid");
    for (auto& m : mask) m = m ? 1 : 0;
    nodata_ = std::move(mask);
}

GeoGrid GeoGrid::extract(std::uint16_t c) const {
    if (c >= channels_) throw ArgumentError("channel index out of range");
    GeoGrid out(spec_, 1, dtype_, {names_[c]});
    auto src = channel(c);
    std::copy(src.begin(), src.end(), out.data_.begin());
    out.nodata_ = nodata_;
    return out;
}

bool GeoGrid::operator==(const GeoGrid& o) const {
    if (!(spec_ == o.spec_) || channels_ != o.channels_ || dtype_ != o.dtype_ || names_ != o.names_ ||
        nodata_ != o.nodata_ || data_.size() != o.data_.size())
        return false;
    return data_.empty() || std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(float)) == 0;
}

namespace {

class Writer {
  public:
    explicit Writer(std::ostream& os) : os_(os) {}
    template <typename T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        raw(buf, sizeof(T));
    }
    void raw(const void* p, std::size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!os_) throw IoError("grid sink write failed");
        count_ += n;
    }
    std::uint64_t count() const { return count_; }

  private:
    std::ostream& os_;
    std::uint64_t count_ = 0;
};

class Reader {
  public:
    explicit Reader(std::istream& is) : is_(is) {}
    template <typename T>
    T get(const char* what) {
        T v;
        char buf[sizeof(T)];
        raw(buf, sizeof(T), what);
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }
    void raw(void* p, std::size_t n, const char* what) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        const auto got = static_cast<std::uint64_t>(is_.gcount());
        if (got != n) {
            throw FormatError(std::string("truncated ") + what + ": expected " + std::to_string(n) +
                                  " bytes, got " + std::to_string(got),
                              offset_ + got);
        }
        offset_ += n;
    }
    std::uint64_t offset() const { return offset_; }

  private:
    std::istream& is_;
    std::uint64_t offset_ = 0;
};

constexpr char kMagic[4] = {'S', 'D', 'G', 'R'};
constexpr std::uint16_t kVersion = 1;

} // namespace

std::uint64_t write_grid(const GeoGrid& g, std::ostream& sink) {
    Writer w(sink);
    w.raw(kMagic, 4);
    w.put<std::uint16_t>(kVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(g.dtype()));
    w.put<std::uint8_t>(g.has_nodata() ? 1 : 0);
    w.put<std::uint32_t>(g.width());
    w.put<std::uint32_t>(g.height());
    w.put<std::uint16_t>(g.channels());
    w.put<double>(g.spec().origin_x);
    w.put<double>(g.spec().origin_y);
    w.put<double>(g.spec().cell_size);
    for (const auto& name : g.channel_names()) {
        w.put<std::uint8_t>(static_cast<std::uint8_t>(name.size()));
        w.raw(name.data(), name.size());
    }
    if (g.dtype() == DType::F32) {
        w.raw(g.values().data(), g.values().size() * sizeof(float));
    } else {
        std::vector<std::uint8_t> bytes(g.values().size());
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            const float v = g.values()[i];
            if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v))
                throw ArgumentError("u8 grid holds non-byte value " + std::to_string(v));
            bytes[i] = static_cast<std::uint8_t>(v);
        }
        w.raw(bytes.data(), bytes.size());
    }
    if (g.has_nodata()) w.raw(g.nodata_mask()->data(), g.nodata_mask()->size());
    sink.flush();
    return w.count();
}

GeoGrid read_grid(std::istream& source) {
    Reader r(source);
    char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic, expected SDGR", 0);
    const auto version = r.get<std::uint16_t>("version");
    if (version != kVersion) throw FormatError("unsupported SDGR version " + std::to_string(version), 4);
    const auto dtype_raw = r.get<std::uint8_t>("dtype");
    if (dtype_raw > 1) throw FormatError("unknown dtype code " + std::to_string(dtype_raw), 6);
    const auto flags = r.get<std::uint8_t>("flags");
    GridSpec spec;
    spec.width = r.get<std::uint32_t>("width");
    spec.height = r.get<std::uint32_t>("height");
    const auto channels = r.get<std::uint16_t>("channels");
    spec.origin_x = r.get<double>("origin_x");
    spec.origin_y = r.get<double>("origin_y");
    spec.cell_size = r.get<double>("cell_size");
    try {
        spec.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(e.what(), r.offset());
    }
    if (channels < 1) throw FormatError("zero channels", 20);
    std::vector<std::string> names;
    for (std::uint16_t c = 0; c < channels; ++c) {
        const auto len = r.get<std::uint8_t>("channel name length");
        std::string name(len, '\0');
        r.raw(name.data(), len, "channel name");
        names.push_back(std::move(name));
    }
    const auto dtype = static_cast<DType>(dtype_raw);
    GeoGrid g(spec, channels, dtype, std::move(names));
    auto& values = g.values();
    if (dtype == DType::F32) {
        r.raw(values.data(), values.size() * sizeof(float), "payload");
    } else {
        std::vector<std::uint8_t> bytes(values.size());
        r.raw(bytes.data(), bytes.size(), "payload");
        for (std::size_t i = 0; i < bytes.size(); ++i) values[i] = bytes[i];
    }
    if (flags & 1u) {
        std::vector<std::uint8_t> mask(spec.pixel_count());
        const auto at = r.offset();
        r.raw(mask.data(), mask.size(), "nodata mask");
        for (auto m : mask) {
            if (m > 1) throw FormatError("nodata mask byte not 0/1", at);
        }
        g.set_nodata_mask(std::move(mask));
    }
    return g;
}

void save_grid(const GeoGrid& grid, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_grid(grid, os);
}

GeoGrid load_grid(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_grid(is);
}

GeoGrid crop(const GeoGrid& grid, const GridWindow& window) {
    if (!window.inside(grid.spec())) throw ArgumentError("crop window outside grid");
    GridSpec spec = grid.spec();
    spec.origin_x += static_cast<double>(window.col0) * spec.cell_size;
    spec.origin_y -= static_cast<double>(window.row0) * spec.cell_size;
    spec.width = window.n_cols;
    spec.height = window.n_rows;
    GeoGrid out(spec, grid.channels(), grid.dtype(), grid.channel_names());
    for (std::uint16_t c = 0; c < grid.channels(); ++c) {
        for (std::uint32_t r = 0; r < window.n_rows; ++r) {
            for (std::uint32_t col = 0; col < window.n_cols; ++col) {
                out.at(c, r, col) = grid.at(c, static_cast<std::uint32_t>(window.row0 + r),
                                            static_cast<std::uint32_t>(window.col0 + col));
            }
        }
    }
    if (grid.has_nodata()) {
        std::vector<std::uint8_t> mask(spec.pixel_count());
        for (std::uint32_t r = 0; r < window.n_rows; ++r)
            for (std::uint32_t col = 0; col < window.n_cols; ++col)
                mask[static_cast<std::size_t>(r) * spec.width + col] = grid.is_nodata(
                    static_cast<std::uint32_t>(window.row0 + r), static_cast<std::uint32_t>(window.col0 + col));
        out.set_nodata_mask(std::move(mask));
    }
    return out;
}

} // namespace sd
