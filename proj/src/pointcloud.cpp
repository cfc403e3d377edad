#include "sd/pointcloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "sd/delaunay.hpp"
#include "sd/error.hpp"
#include "sd/kdtree.hpp"

namespace sd {

std::vector<Point> PointCloud::ground() const {
    std::vector<Point> out;
    for (const auto& p : points)
        if (p.cls == kGroundClass) out.push_back(p);
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_field(std::string_view f, std::size_t line, const char* column) {
    T v{};
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw ParseError("bad value '" + std::string(f) + "' in column " + column, line);
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) throw ParseError(std::string("non-finite ") + column, line);
    }
    return v;
}

} // namespace

PointCloud read_points(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw FormatError("empty point file: missing header", 0);
    const auto header = split_commas(trim(line));
    static const std::vector<std::string_view> base{"x", "y", "z", "class"};
    static const std::vector<std::string_view> spectral{"x", "y", "z", "class", "r", "g", "b", "nir"};
    PointCloud cloud;
    if (header == spectral) {
        cloud.has_spectral = true;
    } else if (header != base) {
        for (auto col : base) {
            if (std::find(header.begin(), header.end(), col) == header.end())
                throw FormatError("point header missing mandatory column '" + std::string(col) + "'", 0);
        }
        throw FormatError("point header must be x,y,z,class[,r,g,b,nir]", 0);
    }
    const std::size_t ncols = header.size();
    std::size_t lineno = 1;
    while (std::getline(source, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto f = split_commas(t);
        if (f.size() != ncols)
            throw ParseError("expected " + std::to_string(ncols) + " fields, got " + std::to_string(f.size()), lineno);
        Point p;
        p.x = parse_field<double>(f[0], lineno, "x");
        p.y = parse_field<double>(f[1], lineno, "y");
        p.z = parse_field<double>(f[2], lineno, "z");
        p.cls = parse_field<int>(f[3], lineno, "class");
        if (cloud.has_spectral) {
            const char* names[4] = {"r", "g", "b", "nir"};
            float* bands[4] = {&p.r, &p.g, &p.b, &p.nir};
            for (int k = 0; k < 4; ++k) {
                const float v = parse_field<float>(f[4 + k], lineno, names[k]);
                if (v < 0.0f || v > 255.0f) throw ParseError(std::string(names[k]) + " outside [0, 255]", lineno);
                *bands[k] = v;
            }
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

PointCloud load_points(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_points(is);
}

void write_points(const PointCloud& cloud, std::ostream& os) {
    os << (cloud.has_spectral ? "x,y,z,class,r,g,b,nir\n" : "x,y,z,class\n");
    char buf[64];
    auto put = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        os.write(buf, res.ptr - buf);
    };
    for (const auto& p : cloud.points) {
        put(p.x);
        os << ',';
        put(p.y);
        os << ',';
        put(p.z);
        os << ',' << p.cls;
        if (cloud.has_spectral) {
            for (float v : {p.r, p.g, p.b, p.nir}) {
                os << ',';
                put(v);
            }
        }
        os << '\n';
    }
    if (!os) throw IoError("point sink write failed");
}

void save_points(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_points(cloud, os);
}

PointCloud normalize_heights(const PointCloud& cloud, const PointCloud& ground_source, const IdwOptions& opt) {
    if (cloud.normalized || ground_source.normalized) throw PreconditionError("cloud is already height-normalized");
    if (opt.k < 1) throw ArgumentError("IDW neighbor count must be >= 1");
    if (!(opt.power > 0.0)) throw ArgumentError("IDW power must be > 0");
    const auto ground = ground_source.ground();
    if (ground.empty()) throw PreconditionError("height normalization needs at least one ground point");

    std::vector<Vec2> xy;
    xy.reserve(ground.size());
    for (const auto& g : ground) xy.push_back({g.x, g.y});
    const KdTree2 tree(std::move(xy));

    PointCloud out = cloud;
    out.normalized = true;
    for (auto& p : out.points) {
        const auto hits = tree.nearest({p.x, p.y}, opt.k);
        double elev;
        if (std::sqrt(hits.front().dist2) < 1e-9) {
            elev = ground[hits.front().index].z;
        } else {
            double wsum = 0.0, zsum = 0.0;
            for (const auto& h : hits) {
                const double w = std::pow(h.dist2, -0.5 * opt.power);
                wsum += w;
                zsum += w * ground[h.index].z;
            }
            elev = zsum / wsum;
        }
        p.z -= elev;
    }
    return out;
}

PointCloud normalize_heights(const PointCloud& cloud, const IdwOptions& opt) {
    return normalize_heights(cloud, cloud, opt);
}

std::vector<Vec2> subcircle_replicas(double x, double y, double radius) {
    std::vector<Vec2> out{{x, y}};
    for (int k = 0; k < 8; ++k) {
        const double theta = k * (M_PI / 4.0);
        out.push_back({x + radius * std::cos(theta), y + radius * std::sin(theta)});
    }
    return out;
}

GeoGrid rasterize_canopy_p2r(const PointCloud& cloud, const GridSpec& spec, double radius) {
    spec.validate();
    if (!cloud.normalized) throw PreconditionError("p2r canopy rasterization needs a height-normalized cloud");
    if (!(radius >= 0.0)) throw ArgumentError("sub-circle radius must be >= 0");
    GeoGrid grid(spec, 1, DType::F32, {"chm"});
    std::vector<std::uint8_t> empty(spec.pixel_count(), 1);
    auto& v = grid.values();

    double dx[9] = {0.0}, dy[9] = {0.0};
    for (int k = 0; k < 8; ++k) {
        const double theta = k * (M_PI / 4.0);
        dx[k + 1] = radius * std::cos(theta);
        dy[k + 1] = radius * std::sin(theta);
    }
    for (const auto& p : cloud.points) {
        const float h = static_cast<float>(p.z);
        for (int k = 0; k < 9; ++k) {
            const auto cell = spec.cell_of(p.x + dx[k], p.y + dy[k]);
            if (!cell) continue;
            const std::size_t i = static_cast<std::size_t>(cell->first) * spec.width + cell->second;
            if (empty[i] || h > v[i]) {
                v[i] = h;
                empty[i] = 0;
            }
        }
    }
    grid.set_nodata_mask(std::move(empty));
    return grid;
}

GeoGrid finalize_height_grid(const GeoGrid& in, double cap) {
    if (!(cap > 0.0)) throw ArgumentError("height cap must be > 0");
    if (in.channels() != 1) throw ArgumentError("finalize expects a single-channel height grid");
    GeoGrid out(in.spec(), 1, DType::F32, in.channel_names());
    const auto src = in.channel(0);
    auto dst = out.channel(0);
    const double w = in.width();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const bool nodata = in.is_nodata(static_cast<std::uint32_t>(i / w), static_cast<std::uint32_t>(i % in.width()));
        double h = src[i];
        if (nodata || !std::isfinite(h) || h < 0.0) h = 0.0;
        dst[i] = static_cast<float>(std::min(h, cap) / cap);
    }
    return out;
}

struct TinSurface::Impl {
    std::vector<Point> ground;
    Delaunay tin;
    KdTree2 tree;
    mutable std::int32_t hint = 0;

    static std::vector<Vec2> xy(const std::vector<Point>& g) {
        std::vector<Vec2> out;
        out.reserve(g.size());
        for (const auto& p : g) out.push_back({p.x, p.y});
        return out;
    }
    explicit Impl(std::vector<Point> g) : ground(std::move(g)), tin(xy(ground)), tree(xy(ground)) {}
};

TinSurface::TinSurface(const PointCloud& cloud) {
    if (cloud.normalized) throw PreconditionError("TIN terrain needs raw elevations, got a normalized cloud");
    auto ground = cloud.ground();
    if (ground.size() < 3) throw GeometryError("TIN terrain needs at least 3 ground points");
    impl_ = std::make_unique<Impl>(std::move(ground)); // throws on collinear input
}

TinSurface::~TinSurface() = default;
TinSurface::TinSurface(TinSurface&&) noexcept = default;

double TinSurface::elevation(const Vec2& q) const {
    const auto& g = impl_->ground;
    if (const auto hit = impl_->tin.locate(q, impl_->hint))
        return hit->w[0] * g[hit->v[0]].z + hit->w[1] * g[hit->v[1]].z + hit->w[2] * g[hit->v[2]].z;
    return g[impl_->tree.nearest(q).index].z;
}

bool TinSurface::inside_hull(const Vec2& q) const { return impl_->tin.locate(q, impl_->hint).has_value(); }

GeoGrid rasterize_terrain_tin(const PointCloud& cloud, const GridSpec& spec) {
    spec.validate();
    const TinSurface surface(cloud);
    GeoGrid grid(spec, 1, DType::F32, {"dtm"});
    for (std::uint32_t r = 0; r < spec.height; ++r) {
        for (std::uint32_t c = 0; c < spec.width; ++c) {
            const double z = surface.elevation({spec.center_x(c), spec.center_y(r)});
            grid.at(0, r, c) = static_cast<float>(z < 0.0 ? 0.0 : z);
        }
    }
    return grid;
}

GeoGrid rasterize_spectral(const PointCloud& cloud, const GridSpec& spec, int fill_kernel) {
    spec.validate();
    if (!cloud.has_spectral) throw PreconditionError("spectral rasterization needs a cloud with spectral values");
    if (fill_kernel < 3 || fill_kernel % 2 == 0) throw ArgumentError("fill kernel must be odd and >= 3");
    const std::size_t n = spec.pixel_count();

    // Sorting by (cell, band values) fixes the summation order, so the means
    // do not depend on point order.
    struct Entry {
        std::size_t cell;
        const Point* p;
    };
    std::vector<Entry> entries;
    entries.reserve(cloud.points.size());
    for (const auto& p : cloud.points) {
        if (const auto cell = spec.cell_of(p.x, p.y))
            entries.push_back({static_cast<std::size_t>(cell->first) * spec.width + cell->second, &p});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.cell != b.cell) return a.cell < b.cell;
        return std::tie(a.p->r, a.p->g, a.p->b, a.p->nir) < std::tie(b.p->r, b.p->g, b.p->b, b.p->nir);
    });

    std::vector<double> sum(4 * n, 0.0);
    std::vector<std::uint32_t> count(n, 0);
    for (const auto& e : entries) {
        const float bands[4] = {e.p->r, e.p->g, e.p->b, e.p->nir};
        for (int b = 0; b < 4; ++b) sum[b * n + e.cell] += bands[b];
        ++count[e.cell];
    }
    std::vector<double> value(4 * n, 0.0);
    std::vector<std::uint8_t> filled(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (count[i] == 0) continue;
        filled[i] = 1;
        for (int b = 0; b < 4; ++b) value[b * n + i] = sum[b * n + i] / count[i];
    }

    const int half = fill_kernel / 2;
    const auto W = static_cast<std::int64_t>(spec.width), H = static_cast<std::int64_t>(spec.height);
    while (true) {
        std::vector<std::pair<std::size_t, std::array<double, 4>>> updates;
        for (std::int64_t r = 0; r < H; ++r) {
            for (std::int64_t c = 0; c < W; ++c) {
                const std::size_t i = static_cast<std::size_t>(r * W + c);
                if (filled[i]) continue;
                std::array<double, 4> acc{};
                int k = 0;
                for (std::int64_t dr = -half; dr <= half; ++dr) {
                    for (std::int64_t dc = -half; dc <= half; ++dc) {
                        const std::int64_t rr = r + dr, cc = c + dc;
                        if (rr < 0 || cc < 0 || rr >= H || cc >= W) continue;
                        const std::size_t j = static_cast<std::size_t>(rr * W + cc);
                        if (!filled[j]) continue;
                        for (int b = 0; b < 4; ++b) acc[b] += value[b * n + j];
                        ++k;
                    }
                }
                if (k == 0) continue;
                for (auto& a : acc) a /= k;
                updates.emplace_back(i, acc);
            }
        }
        if (updates.empty()) break;
        for (const auto& [i, acc] : updates) {
            filled[i] = 1;
            for (int b = 0; b < 4; ++b) value[b * n + i] = acc[b];
        }
    }

    GeoGrid grid(spec, 4, DType::F32, {"r", "g", "b", "nir"});
    auto& out = grid.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(value[i]);
    return grid;
}

} // namespace sd
