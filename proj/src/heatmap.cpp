#include "gocollab/heatmap.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gocollab/errors.hpp"

namespace gocollab::collab {

void write_map_csv(const std::filesystem::path& path, const ScoreGrid& map) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "row,col,score\n";
    char buf[64];
    for (int r = 0; r < map.h; ++r)
        for (int c = 0; c < map.w; ++c) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", r, c, map.at(r, c));
            os << buf;
        }
}

ScoreGrid read_map_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open map file " + path.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("row,col,score", 0) != 0)
        throw IoError(path.string() + ": missing map CSV header");
    struct Entry {
        int r, c;
        double v;
    };
    std::vector<Entry> entries;
    int max_r = -1, max_c = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Entry e{};
        std::istringstream ss(line);
        char comma;
        if (!(ss >> e.r >> comma >> e.c >> comma >> e.v))
            throw IoError(path.string() + ": malformed map row '" + line + "'");
        max_r = std::max(max_r, e.r);
        max_c = std::max(max_c, e.c);
        entries.push_back(e);
    }
    if (entries.empty()) throw IoError(path.string() + ": empty map");
    ScoreGrid g = ScoreGrid::zeros(max_r + 1, max_c + 1);
    for (const Entry& e : entries) g.at(e.r, e.c) = e.v;
    return g;
}

void write_heatmap_ppm(const std::filesystem::path& path, const ScoreGrid& map,
                       int cell_px, bool grid) {
    const double scale = map.max_abs();
    const int width = map.w * cell_px;
    const int height = map.h * cell_px;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "P6\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
    for (int py = 0; py < height; ++py) {
        const int r = py / cell_px;
        for (int px = 0; px < width; ++px) {
            const int c = px / cell_px;
            double t = scale > 0.0 ? map.at(r, c) / scale : 0.0;
            unsigned char rr = 255, gg = 255, bb = 255;
            if (t > 0.0) {  // white -> red
                gg = bb = static_cast<unsigned char>(std::lround(255.0 * (1.0 - t)));
            } else if (t < 0.0) {  // white -> blue
                rr = gg = static_cast<unsigned char>(std::lround(255.0 * (1.0 + t)));
            }
            if (grid) {
                const int mid = cell_px / 2;
                const bool on_line = (py % cell_px == mid) || (px % cell_px == mid);
                if (on_line) {
                    rr = static_cast<unsigned char>(rr * 3 / 4);
                    gg = static_cast<unsigned char>(gg * 3 / 4);
                    bb = static_cast<unsigned char>(bb * 3 / 4);
                }
            }
            row[static_cast<std::size_t>(px) * 3 + 0] = rr;
            row[static_cast<std::size_t>(px) * 3 + 1] = gg;
            row[static_cast<std::size_t>(px) * 3 + 2] = bb;
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace gocollab::collab
