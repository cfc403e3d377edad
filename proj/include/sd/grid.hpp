#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sd {

enum class DType : std::uint8_t { F32 = 0, U8 = 1 };

/// Raster lattice in planar meters. Row 0 is the northern edge.
struct GridSpec {
    double origin_x = 0.0; ///< west edge
    double origin_y = 0.0; ///< north edge
    double cell_size = 1.0;
    std::uint32_t width = 1;
    std::uint32_t height = 1;

    void validate() const;

    double center_x(std::int64_t col) const { return origin_x + (static_cast<double>(col) + 0.5) * cell_size; }
    double center_y(std::int64_t row) const { return origin_y - (static_cast<double>(row) + 0.5) * cell_size; }

    /// Cell containing (x, y); cells are half-open [west, east) x (south, north].
    /// Returns nullopt outside the lattice.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> cell_of(double x, double y) const;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    bool operator==(const GridSpec&) const = default;
};

struct GridWindow {
    std::int64_t row0 = 0;
    std::int64_t col0 = 0;
    std::uint32_t n_rows = 0;
    std::uint32_t n_cols = 0;

    bool inside(const GridSpec& spec) const {
        return row0 >= 0 && col0 >= 0 && n_rows >= 1 && n_cols >= 1 &&
               row0 + n_rows <= spec.height && col0 + n_cols <= spec.width;
    }
    bool operator==(const GridWindow&) const = default;
};

/// Georeferenced multi-channel raster, channel-planar and row-major.
///
/// Values are held as float regardless of dtype; a U8 grid stores integer
/// values in [0, 255] and serializes them as bytes. The nodata mask is
/// explicit because 0 is a legitimate height.
class GeoGrid {
  public:
    GeoGrid() = default;
    GeoGrid(const GridSpec& spec, std::uint16_t channels, DType dtype = DType::F32,
            std::vector<std::string> channel_names = {});

    const GridSpec& spec() const { return spec_; }
    std::uint32_t width() const { return spec_.width; }
    std::uint32_t height() const { return spec_.height; }
    std::uint16_t channels() const { return channels_; }
    DType dtype() const { return dtype_; }
    const std::vector<std::string>& channel_names() const { return names_; }
    void set_channel_name(std::uint16_t c, std::string name) { names_.at(c) = std::move(name); }

    std::size_t index(std::uint16_t c, std::uint32_t row, std::uint32_t col) const {
        return (static_cast<std::size_t>(c) * spec_.height + row) * spec_.width + col;
    }
    float at(std::uint16_t c, std::uint32_t row, std::uint32_t col) const { return data_[index(c, row, col)]; }
    float& at(std::uint16_t c, std::uint32_t row, std::uint32_t col) { return data_[index(c, row, col)]; }

    std::span<float> channel(std::uint16_t c);
    std::span<const float> channel(std::uint16_t c) const;
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    bool has_nodata() const { return nodata_.has_value(); }
    bool is_nodata(std::uint32_t row, std::uint32_t col) const {
        return nodata_ && (*nodata_)[static_cast<std::size_t>(row) * spec_.width + col] != 0;
    }
    void set_nodata(std::uint32_t row, std::uint32_t col, bool flag);
    const std::optional<std::vector<std::uint8_t>>& nodata_mask() const { return nodata_; }
    void set_nodata_mask(std::vector<std::uint8_t> mask);
    void clear_nodata() { nodata_.reset(); }

    /// Single-channel copy of channel c (keeps the nodata mask).
    GeoGrid extract(std::uint16_t c) const;

    bool operator==(const GeoGrid& other) const;

  private:
    GridSpec spec_{};
    std::uint16_t channels_ = 0;
    DType dtype_ = DType::F32;
    std::vector<std::string> names_;
    std::vector<float> data_;
    std::optional<std::vector<std::uint8_t>> nodata_;
};

/// Serializes to the SDGR container. Returns the number of bytes written.
std::uint64_t write_grid(const GeoGrid& grid, std::ostream& sink);
GeoGrid read_grid(std::istream& source);

void save_grid(const GeoGrid& grid, const std::filesystem::path& path);
GeoGrid load_grid(const std::filesystem::path& path);

GeoGrid crop(const GeoGrid& grid, const GridWindow& window);

} // namespace sd
