#include "abmphase/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace abmphase::svg {

namespace {

struct Rgb {
    double r, g, b;
};

// coarse viridis control points
constexpr Rgb kViridis[] = {{0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
                            {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
                            {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
                            {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};

std::string color_of(double t) {
    t = std::clamp(t, 0.0, 1.0);
    constexpr int n = static_cast<int>(std::size(kViridis)) - 1;
    const double pos = t * n;
    const int i = std::min(static_cast<int>(pos), n - 1);
    const double f = pos - i;
    const Rgb c{kViridis[i].r + f * (kViridis[i + 1].r - kViridis[i].r),
                kViridis[i].g + f * (kViridis[i + 1].g - kViridis[i].g),
                kViridis[i].b + f * (kViridis[i + 1].b - kViridis[i].b)};
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(c.r * 255),
                  static_cast<int>(c.g * 255), static_cast<int>(c.b * 255));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_figure(const std::string& path, const Figure& fig) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    double cmin = xmin, cmax = -xmin;
    for (const auto& s : fig.series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
        for (double v : s.color) {
            cmin = std::min(cmin, v);
            cmax = std::max(cmax, v);
        }
    }
    if (!(xmax > xmin)) {
        xmin -= 1;
        xmax += 1;
    }
    if (!(ymax > ymin)) {
        ymin -= 1;
        ymax += 1;
    }
    const double xpad = 0.05 * (xmax - xmin);
    const double ypad = 0.05 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    const double ml = 60, mr = fig.colorbar_label.empty() ? 20 : 70, mt = 40, mb = 50;
    const double pw = fig.width - ml - mr;
    const double ph = fig.height - mt - mb;
    auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << fig.width << "' height='"
      << fig.height << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << fig.width / 2 << "' y='24' text-anchor='middle' font-size='15'>"
      << fig.title << "</text>\n";

    // axes box and ticks
    f << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double vx = xmin + (xmax - xmin) * i / 4;
        const double vy = ymin + (ymax - ymin) * i / 4;
        f << "<text x='" << X(vx) << "' y='" << mt + ph + 18
          << "' text-anchor='middle' font-size='11'>" << fmt(vx) << "</text>\n";
        f << "<text x='" << ml - 6 << "' y='" << Y(vy) + 4
          << "' text-anchor='end' font-size='11'>" << fmt(vy) << "</text>\n";
    }
    f << "<text x='" << ml + pw / 2 << "' y='" << fig.height - 10
      << "' text-anchor='middle' font-size='13'>" << fig.x_label << "</text>\n";
    f << "<text x='16' y='" << mt + ph / 2 << "' text-anchor='middle' font-size='13' "
      << "transform='rotate(-90 16 " << mt + ph / 2 << ")'>" << fig.y_label << "</text>\n";

    for (const auto& s : fig.series) {
        if (s.line && s.x.size() > 1) {
            f << "<polyline fill='none' stroke='" << s.fixed_color << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                f << fmt(X(s.x[i])) << "," << fmt(Y(s.y[i])) << " ";
            f << "'/>\n";
            continue;
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            std::string col = s.fixed_color;
            if (!s.color.empty() && cmax > cmin)
                col = color_of((s.color[i] - cmin) / (cmax - cmin));
            f << "<circle cx='" << fmt(X(s.x[i])) << "' cy='" << fmt(Y(s.y[i])) << "' r='"
              << s.marker_radius << "' fill='" << col << "' fill-opacity='0.75'/>\n";
        }
    }

    if (!fig.colorbar_label.empty() && cmax > cmin) {
        const double bx = ml + pw + 18, bw = 14;
        for (int i = 0; i < 50; ++i) {
            const double t0 = static_cast<double>(i) / 50;
            f << "<rect x='" << bx << "' y='" << mt + ph * (1.0 - t0 - 0.02) << "' width='" << bw
              << "' height='" << ph / 50 + 1 << "' fill='" << color_of(t0) << "'/>\n";
        }
        f << "<text x='" << bx + bw / 2 << "' y='" << mt - 8
          << "' text-anchor='middle' font-size='11'>" << fig.colorbar_label << "</text>\n";
        f << "<text x='" << bx + bw + 4 << "' y='" << mt + ph << "' font-size='10'>" << fmt(cmin)
          << "</text>\n";
        f << "<text x='" << bx + bw + 4 << "' y='" << mt + 10 << "' font-size='10'>" << fmt(cmax)
          << "</text>\n";
    }
    f << "</svg>\n";
}

void write_bars(const std::string& path, const std::string& title,
                const std::vector<std::string>& labels, const std::vector<double>& values) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    const int width = 640, height = 400;
    const double ml = 50, mr = 20, mt = 40, mb = 40;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const double vmax = values.empty() ? 1.0 : std::max(1e-12, *std::max_element(values.begin(), values.end()));
    const double bw = pw / std::max<std::size_t>(1, values.size());

    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double h = ph * values[i] / vmax;
        f << "<rect x='" << ml + bw * i + 2 << "' y='" << mt + ph - h << "' width='" << bw - 4
          << "' height='" << h << "' fill='#1f77b4'/>\n";
        f << "<text x='" << ml + bw * i + bw / 2 << "' y='" << height - 20
          << "' text-anchor='middle' font-size='11'>" << labels[i] << "</text>\n";
        f << "<text x='" << ml + bw * i + bw / 2 << "' y='" << mt + ph - h - 4
          << "' text-anchor='middle' font-size='10'>" << fmt(values[i]) << "</text>\n";
    }
    f << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
      << "' stroke='black'/>\n</svg>\n";
}

}  // namespace abmphase::svg
