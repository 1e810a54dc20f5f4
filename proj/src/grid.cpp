#include "cyanocast/grid.hpp"

#include <sstream>

#include "cyanocast/text_io.hpp"

namespace cyano {

char provenance_code(Provenance p) {
    switch (p) {
        case Provenance::Observed: return 'O';
        case Provenance::Locf: return 'L';
        case Provenance::Weighted: return 'W';
        case Provenance::Restored: return 'R';
        case Provenance::Missing: return 'M';
    }
    throw std::logic_error("bad provenance value");
}

Provenance provenance_from_code(char c) {
    switch (c) {
        case 'O': return Provenance::Observed;
        case 'L': return Provenance::Locf;
        case 'W': return Provenance::Weighted;
        case 'R': return Provenance::Restored;
        case 'M': return Provenance::Missing;
    }
    throw DataError(std::string("unknown provenance code '") + c + "'");
}

Grid Grid::all_missing(int width, int height, double nodata) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("grid dimensions must be positive");
    Grid g;
    g.width = width;
    g.height = height;
    g.nodata = nodata;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    g.values.assign(n, nodata);
    g.provenance.assign(n, Provenance::Missing);
    g.consec_imputed.assign(n, 0);
    return g;
}

void Grid::set_value(std::size_t i, double v, Provenance p,
                     std::uint16_t consec) {
    if (p == Provenance::Missing)
        throw std::invalid_argument("use set_missing for missing pixels");
    values[i] = v;
    provenance[i] = p;
    consec_imputed[i] = is_imputed(p) ? consec : 0;
}

void Grid::set_missing(std::size_t i) {
    values[i] = nodata;
    provenance[i] = Provenance::Missing;
    consec_imputed[i] = 0;
}

std::size_t Grid::missing_count() const {
    std::size_t n = 0;
    for (const Provenance p : provenance)
        if (p == Provenance::Missing) ++n;
    return n;
}

std::string encode_grid(const Grid& grid) {
    std::string out;
    out.reserve(grid.size() * 8 + 64);
    out += "GRD1 ";
    out += std::to_string(grid.width);
    out += ' ';
    out += std::to_string(grid.height);
    out += ' ';
    out += fmt_double(grid.nodata);
    out += "\nPROV 1\n";
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            if (x) out += ' ';
            out += fmt_double(grid.values[static_cast<std::size_t>(y) *
                                              grid.width + x]);
        }
        out += '\n';
    }
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x)
            out += provenance_code(
                grid.provenance[static_cast<std::size_t>(y) * grid.width + x]);
        out += '\n';
    }
    return out;
}

namespace {

// Pulls whitespace-separated tokens; keeps the origin string for messages.
struct TokenReader {
    std::istringstream in;
    const std::string& origin;

    TokenReader(const std::string& text, const std::string& origin)
        : in(text), origin(origin) {}

    std::string next(const char* what) {
        std::string tok;
        if (!(in >> tok))
            throw DataError(origin + ": truncated file, expected " +
                            std::string(what));
        return tok;
    }
};

}  // namespace

Grid decode_grid(const std::string& text, const std::string& origin) {
    TokenReader rd(text, origin);
    if (rd.next("GRD1 magic") != "GRD1")
        throw DataError(origin + ": malformed header, expected GRD1");
    const long w = parse_long(rd.next("width"));
    const long h = parse_long(rd.next("height"));
    if (w <= 0 || h <= 0 || w > 100000 || h > 100000)
        throw DataError(origin + ": bad grid dimensions");
    const double nodata = parse_double(rd.next("nodata"));
    if (rd.next("PROV keyword") != "PROV")
        throw DataError(origin + ": malformed header, expected PROV");
    const long prov_flag = parse_long(rd.next("PROV flag"));
    if (prov_flag != 0 && prov_flag != 1)
        throw DataError(origin + ": PROV flag must be 0 or 1");

    Grid g = Grid::all_missing(static_cast<int>(w), static_cast<int>(h),
                               nodata);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i)
        g.values[i] = parse_double(rd.next("pixel value"));

    if (prov_flag == 1) {
        std::size_t i = 0;
        char c;
        while (i < n && rd.in >> c)
            g.provenance[i++] = provenance_from_code(c);
        if (i < n)
            throw DataError(origin + ": truncated provenance section");
    } else {
        for (std::size_t i = 0; i < n; ++i)
            g.provenance[i] = g.values[i] == nodata ? Provenance::Missing
                                                    : Provenance::Observed;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const bool miss_prov = g.provenance[i] == Provenance::Missing;
        const bool miss_val = g.values[i] == nodata;
        if (miss_prov != miss_val)
            throw DataError(origin +
                            ": provenance and nodata disagree at pixel " +
                            std::to_string(i));
    }
    // Counters are not persisted; the series loader rebuilds them from the
    // provenance chain across days.
    return g;
}

Grid load_grid(const std::filesystem::path& path) {
    return decode_grid(read_file(path), path.string());
}

void save_grid(const Grid& grid, const std::filesystem::path& path) {
    atomic_write_file(path, encode_grid(grid));
}

BathymetryGrid load_bathymetry(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    TokenReader rd(text, path.string());
    const std::string origin = path.string();
    if (rd.next("GRD1 magic") != "GRD1")
        throw DataError(origin + ": malformed header, expected GRD1");
    const long w = parse_long(rd.next("width"));
    const long h = parse_long(rd.next("height"));
    if (w <= 0 || h <= 0)
        throw DataError(origin + ": bad grid dimensions");
    parse_double(rd.next("nodata"));
    if (rd.next("PROV keyword") != "PROV" ||
        parse_long(rd.next("PROV flag")) != 0)
        throw DataError(origin + ": bathymetry must carry PROV 0");
    BathymetryGrid g;
    g.width = static_cast<int>(w);
    g.height = static_cast<int>(h);
    g.depth.resize(static_cast<std::size_t>(w) * h);
    for (double& d : g.depth) d = parse_double(rd.next("depth value"));
    return g;
}

void save_bathymetry(const BathymetryGrid& grid,
                     const std::filesystem::path& path) {
    std::string out;
    out += "GRD1 " + std::to_string(grid.width) + ' ' +
           std::to_string(grid.height) + " -9999\nPROV 0\n";
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            if (x) out += ' ';
            out += fmt_double(grid.depth[static_cast<std::size_t>(y) *
                                             grid.width + x]);
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

}  // namespace cyano
