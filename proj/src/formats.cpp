#include "sd/formats.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sd/error.hpp"

namespace sd {

using json = nlohmann::ordered_json;

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
    }
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad field '") + key + "': " + e.what(), 0);
    }
}

json ring_json(const Ring& ring) {
    json a = json::array();
    for (const Vec2& p : ring) a.push_back({p.x, p.y});
    return a;
}

Ring parse_ring(const json& j) {
    if (!j.is_array()) throw ParseError("ring must be an array of [x, y] pairs", 0);
    Ring ring;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ParseError("ring vertex must be [x, y]", 0);
        ring.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return ring;
}

json holes_json(const std::vector<Ring>& holes) {
    json a = json::array();
    for (const Ring& h : holes) a.push_back(ring_json(h));
    return a;
}

std::vector<Ring> parse_holes(const json& j) {
    std::vector<Ring> holes;
    if (j.contains("holes"))
        for (const auto& h : j.at("holes")) holes.push_back(parse_ring(h));
    return holes;
}

std::string split_name(Split s) { return s == Split::Train ? "train" : "validation"; }

} // namespace

std::string grid_spec_json(const GridSpec& s) {
    json j{{"origin_x", s.origin_x}, {"origin_y", s.origin_y}, {"cell_size", s.cell_size},
           {"width", s.width},       {"height", s.height}};
    return j.dump(2) + "\n";
}

GridSpec parse_grid_spec(const std::string& text) {
    const json j = parse_json(text);
    GridSpec s;
    s.origin_x = field<double>(j, "origin_x");
    s.origin_y = field<double>(j, "origin_y");
    s.cell_size = field<double>(j, "cell_size");
    s.width = field<std::uint32_t>(j, "width");
    s.height = field<std::uint32_t>(j, "height");
    s.validate();
    return s;
}

GridSpec load_grid_spec(const std::filesystem::path& path) { return parse_grid_spec(read_text(path)); }

std::string stands_json(const std::vector<StandPolygon>& stands) {
    json arr = json::array();
    for (const auto& s : stands)
        arr.push_back({{"id", s.stand_id},
                       {"class", to_string(s.dev_class)},
                       {"exterior", ring_json(s.polygon.exterior)},
                       {"holes", holes_json(s.polygon.holes)}});
    return json{{"stands", arr}}.dump() + "\n";
}

std::vector<StandPolygon> parse_stands(const std::string& text) {
    const json j = parse_json(text);
    std::vector<StandPolygon> out;
    for (const auto& s : field<json>(j, "stands")) {
        StandPolygon sp;
        sp.stand_id = field<int>(s, "id");
        try {
            sp.dev_class = dev_class_from_string(field<std::string>(s, "class"));
        } catch (const ArgumentError& e) {
            throw ParseError("stand " + std::to_string(sp.stand_id) + ": " + e.what(), 0);
        }
        sp.polygon.exterior = parse_ring(field<json>(s, "exterior"));
        sp.polygon.holes = parse_holes(s);
        out.push_back(std::move(sp));
    }
    return out;
}

std::string municipalities_json(const std::vector<Municipality>& munis) {
    json arr = json::array();
    for (const auto& m : munis)
        arr.push_back({{"id", m.id}, {"exterior", ring_json(m.polygon.exterior)}, {"holes", holes_json(m.polygon.holes)}});
    return json{{"municipalities", arr}}.dump() + "\n";
}

std::vector<Municipality> parse_municipalities(const std::string& text) {
    const json j = parse_json(text);
    std::vector<Municipality> out;
    for (const auto& m : field<json>(j, "municipalities")) {
        Municipality mu;
        mu.id = field<int>(m, "id");
        mu.polygon.exterior = parse_ring(field<json>(m, "exterior"));
        mu.polygon.holes = parse_holes(m);
        out.push_back(std::move(mu));
    }
    return out;
}

std::string tiles_json(const TileSet& set) {
    json arr = json::array();
    for (const Tile& t : set.tiles)
        arr.push_back({{"id", t.id},
                       {"lattice_row", t.lattice_row},
                       {"lattice_col", t.lattice_col},
                       {"row0", t.window.row0},
                       {"col0", t.window.col0},
                       {"n_rows", t.window.n_rows},
                       {"n_cols", t.window.n_cols},
                       {"municipality", t.municipality},
                       {"split", split_name(t.split)},
                       {"coverage", t.coverage}});
    json j{{"grid", parse_json(grid_spec_json(set.grid))},
           {"tile_px", set.tile_px},
           {"val_period", set.pattern.period},
           {"val_offset", {set.pattern.offset.first, set.pattern.offset.second}},
           {"tiles", arr}};
    return j.dump(1) + "\n";
}

TileSet parse_tiles(const std::string& text) {
    const json j = parse_json(text);
    TileSet set;
    set.grid = parse_grid_spec(field<json>(j, "grid").dump());
    set.tile_px = field<std::uint32_t>(j, "tile_px");
    set.pattern.period = field<std::uint32_t>(j, "val_period");
    const auto off = field<std::vector<std::uint32_t>>(j, "val_offset");
    if (off.size() != 2) throw ParseError("val_offset must be [row, col]", 0);
    set.pattern.offset = {off[0], off[1]};
    for (const auto& t : field<json>(j, "tiles")) {
        Tile tile;
        tile.id = field<int>(t, "id");
        tile.lattice_row = field<std::uint32_t>(t, "lattice_row");
        tile.lattice_col = field<std::uint32_t>(t, "lattice_col");
        tile.window.row0 = field<std::int64_t>(t, "row0");
        tile.window.col0 = field<std::int64_t>(t, "col0");
        tile.window.n_rows = field<std::uint32_t>(t, "n_rows");
        tile.window.n_cols = field<std::uint32_t>(t, "n_cols");
        tile.municipality = field<int>(t, "municipality");
        const auto split = field<std::string>(t, "split");
        if (split != "train" && split != "validation") throw ParseError("unknown split '" + split + "'", 0);
        tile.split = split == "train" ? Split::Train : Split::Validation;
        tile.coverage = field<double>(t, "coverage");
        set.tiles.push_back(tile);
    }
    return set;
}

std::string fold_plan_json(const FoldPlan& plan) {
    json arr = json::array();
    for (const Fold& f : plan.folds)
        arr.push_back({{"test_municipality", f.test_municipality}, {"train", f.train}, {"val", f.val}, {"test", f.test}});
    return json{{"folds", arr}}.dump() + "\n";
}

FoldPlan parse_fold_plan(const std::string& text) {
    const json j = parse_json(text);
    FoldPlan plan;
    for (const auto& f : field<json>(j, "folds")) {
        Fold fold;
        fold.test_municipality = field<int>(f, "test_municipality");
        fold.train = field<std::vector<int>>(f, "train");
        fold.val = field<std::vector<int>>(f, "val");
        fold.test = field<std::vector<int>>(f, "test");
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

std::string report_json(const MetricReport& r) {
    json per = json::object();
    for (std::size_t k = 0; k < r.per_class.size(); ++k) {
        const auto& c = r.per_class[k];
        per[std::to_string(k)] = {{"mcc", c.mcc}, {"iou", c.iou}, {"f1", c.f1}, {"ua", c.ua}, {"pa", c.pa}};
    }
    json cm = json::array();
    for (std::size_t i = 0; i < r.cm.classes(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.cm.classes(); ++j) row.push_back(r.cm.at(i, j));
        cm.push_back(row);
    }
    json j{{"oa", r.oa},     {"mmcc", r.mmcc},         {"miou", r.miou},
           {"mf1", r.mf1},   {"mua", r.mua},           {"mpa", r.mpa},
           {"per_class", per}, {"reference", r.reference}, {"prediction", r.prediction},
           {"confusion", cm}};
    return j.dump(2) + "\n";
}

std::string report_csv(const MetricReport& r) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "reference,prediction,oa,mmcc,miou,mf1,mua,mpa\n";
    out << r.reference << ',' << r.prediction << ',' << r.oa << ',' << r.mmcc << ',' << r.miou << ',' << r.mf1 << ','
        << r.mua << ',' << r.mpa << '\n';
    return out.str();
}

std::string stand_polygons_json(const std::vector<StandOutPolygon>& polys) {
    json arr = json::array();
    for (const auto& p : polys)
        arr.push_back({{"id", p.region_id},
                       {"class", to_string(dev_class_from_code(p.dev_class))},
                       {"code", p.dev_class},
                       {"exterior", ring_json(p.polygon.exterior)},
                       {"holes", holes_json(p.polygon.holes)},
                       {"area_m2", p.area_m2},
                       {"shape_index", p.shape_index},
                       {"flag", p.flag}});
    return json{{"stands", arr}}.dump() + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace sd
