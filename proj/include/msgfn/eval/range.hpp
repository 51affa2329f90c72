#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "msgfn/eval/generate.hpp"

namespace msgfn {

struct RangeAxis {
  std::string property;
  int width = 1;  // values per bin
  int bins = 1;   // values past the last bin are counted in it
};

struct ExpressiveRange {
  RangeAxis x, y;
  std::vector<std::vector<std::size_t>> counts;  // counts[y][x]
  std::size_t total = 0;

  std::size_t at(int bx, int by) const { return counts[static_cast<std::size_t>(by)][static_cast<std::size_t>(bx)]; }
};

/// Solution length against pushed crates for Sokoban, path length against
/// nearest enemy for Zelda, solution length against jumps for Dave.
inline std::pair<RangeAxis, RangeAxis> range_axes(Game game, Size s) {
  const int area = s.area();
  const int len_bins = 40;
  const int len_width = std::max(1, (game == Game::zelda ? area : 4 * area) / len_bins);
  switch (game) {
    case Game::sokoban: return {{"solution_length", len_width, len_bins}, {"pushed_crates", 1, std::max(1, area - 1)}};
    case Game::zelda: return {{"path_length", len_width, len_bins}, {"nearest_enemy", std::max(1, area / 40), 40}};
    case Game::dave:
      return {{"solution_length", len_width, len_bins}, {"jumps", 1, std::max(1, std::max(s.width, s.height) + 1)}};
  }
  return {};
}

inline ExpressiveRange expressive_range(const std::vector<Sample>& samples, const RangeAxis& x, const RangeAxis& y) {
  ExpressiveRange r{x, y, std::vector<std::vector<std::size_t>>(y.bins, std::vector<std::size_t>(x.bins, 0)), 0};
  const auto bin = [](const RangeAxis& a, int v) { return std::clamp(v / a.width, 0, a.bins - 1); };
  for (const Sample& s : samples) {
    if (!s.analysis.playable) continue;
    const int bx = bin(x, s.analysis.property(x.property));
    const int by = bin(y, s.analysis.property(y.property));
    ++r.counts[static_cast<std::size_t>(by)][static_cast<std::size_t>(bx)];
    ++r.total;
  }
  return r;
}

/// One row per non-empty bin with inclusive lower and exclusive upper bounds.
inline void write_range_csv(std::ostream& os, const ExpressiveRange& r) {
  os << r.x.property << "_lo," << r.x.property << "_hi," << r.y.property << "_lo," << r.y.property << "_hi,count\n";
  for (int by = 0; by < r.y.bins; ++by)
    for (int bx = 0; bx < r.x.bins; ++bx)
      if (const std::size_t c = r.at(bx, by))
        os << bx * r.x.width << ',' << (bx + 1) * r.x.width << ',' << by * r.y.width << ',' << (by + 1) * r.y.width
           << ',' << c << '\n';
}

inline void write_range_svg(std::ostream& os, const ExpressiveRange& r, const std::string& title) {
  const int cell = 10, margin = 50;
  const int w = r.x.bins * cell, h = r.y.bins * cell;
  std::size_t peak = 0;
  for (const auto& row : r.counts)
    for (std::size_t c : row) peak = std::max(peak, c);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 2 * margin << "\" height=\"" << h + 2 * margin
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << margin << "\" y=\"20\">" << title << " (" << r.total << " playable)</text>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"#fff\" stroke=\"#000\"/>\n";
  for (int by = 0; by < r.y.bins; ++by)
    for (int bx = 0; bx < r.x.bins; ++bx) {
      const std::size_t c = r.at(bx, by);
      if (!c) continue;
      const double shade = static_cast<double>(c) / static_cast<double>(peak);
      os << "<rect x=\"" << margin + bx * cell << "\" y=\"" << margin + h - (by + 1) * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"#08306b\" fill-opacity=\"" << 0.1 + 0.9 * shade << "\"/>\n";
    }
  os << "<text x=\"" << margin + w / 2 << "\" y=\"" << h + margin + 30 << "\" text-anchor=\"middle\">"
     << r.x.property << " (bin " << r.x.width << ")</text>\n";
  os << "<text x=\"15\" y=\"" << margin + h / 2 << "\" transform=\"rotate(-90 15 " << margin + h / 2
     << ")\" text-anchor=\"middle\">" << r.y.property << " (bin " << r.y.width << ")</text>\n";
  os << "</svg>\n";
}

}  // namespace msgfn
