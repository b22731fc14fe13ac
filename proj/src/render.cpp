#include "sgnet/render.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sgnet/error.hpp"

namespace sgnet {
namespace {

// Five anchors of the viridis colour map.
constexpr std::array<std::array<double, 3>, 5> kStops = {{{68, 1, 84},
                                                          {59, 82, 139},
                                                          {33, 145, 140},
                                                          {94, 201, 98},
                                                          {253, 231, 37}}};

std::array<unsigned char, 3> colour(double t) {
    t = std::clamp(t, 0.0, 1.0) * (kStops.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), kStops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<unsigned char, 3> c{};
    for (std::size_t k = 0; k < 3; ++k)
        c[k] = static_cast<unsigned char>(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
    return c;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_heatmap_png(const Matrix& m, double vmin, double vmax, const std::filesystem::path& file) {
    if (m.rows() == 0 || m.cols() == 0) throw ContractError("write_heatmap_png: empty matrix");
    if (!(vmax > vmin)) throw ContractError("write_heatmap_png: need vmax > vmin");
    const std::size_t cell = std::max<std::size_t>(2, 480 / std::max(m.rows(), m.cols()));
    const std::size_t w = m.cols() * cell, h = m.rows() * cell;
    std::vector<unsigned char> rows(w * h * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double v = m(y / cell, x / cell);
            const auto c = colour(std::isfinite(v) ? (v - vmin) / (vmax - vmin) : 0.0);
            std::copy(c.begin(), c.end(), rows.begin() + static_cast<std::ptrdiff_t>(3 * (y * w + x)));
        }

    FILE* fp = std::fopen(file.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write " + file.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing " + file.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < h; ++y) png_write_row(png, rows.data() + 3 * y * w);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw IoError("write failed for " + file.string());
}

std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    constexpr double W = 720, H = 400, L = 70, R = 170, T = 40, B = 50;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t n = 1;
    for (const Series& s : series) {
        n = std::max(n, s.y.size());
        for (double v : s.y)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto sx = [&](double i) { return L + (W - L - R) * (n > 1 ? i / static_cast<double>(n - 1) : 0.5); };
    auto sy = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(W) + "\" height=\"" + px(H) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + px(W / 2 - R / 2 + L / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
    s += "<rect x=\"" + px(L) + "\" y=\"" + px(T) + "\" width=\"" + px(W - L - R) + "\" height=\"" +
         px(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        s += "<line x1=\"" + px(L - 4) + "\" x2=\"" + px(L) + "\" y1=\"" + px(sy(v)) + "\" y2=\"" + px(sy(v)) +
             "\" stroke=\"black\"/>";
        s += "<text x=\"" + px(L - 7) + "\" y=\"" + px(sy(v) + 4) + "\" text-anchor=\"end\">" + num(v) + "</text>\n";
        const double i = (n - 1) * k / 4.0;
        s += "<line x1=\"" + px(sx(i)) + "\" x2=\"" + px(sx(i)) + "\" y1=\"" + px(H - B) + "\" y2=\"" +
             px(H - B + 4) + "\" stroke=\"black\"/>";
        s += "<text x=\"" + px(sx(i)) + "\" y=\"" + px(H - B + 17) + "\" text-anchor=\"middle\">" +
             num(std::round(i) + 1) + "</text>\n";
    }
    s += "<text x=\"" + px(L + (W - L - R) / 2) + "\" y=\"" + px(H - 10) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + px(T + (H - T - B) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* c = kPalette[k % kPalette.size()];
        std::string pts;
        for (std::size_t i = 0; i < series[k].y.size(); ++i)
            if (std::isfinite(series[k].y[i]))
                pts += (pts.empty() ? "" : " ") + px(sx(static_cast<double>(i))) + "," + px(sy(series[k].y[i]));
        s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
        const double ly = T + 10 + 18.0 * static_cast<double>(k);
        s += "<line x1=\"" + px(W - R + 15) + "\" x2=\"" + px(W - R + 35) + "\" y1=\"" + px(ly) + "\" y2=\"" +
             px(ly) + "\" stroke=\"" + c + "\" stroke-width=\"2\"/>";
        s += "<text x=\"" + px(W - R + 40) + "\" y=\"" + px(ly + 4) + "\">" + escape(series[k].label) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace sgnet
