#include "panlut/raster_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace panlut {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

float get_f32(std::istream& is) {
    const std::uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::uint32_t quantize(double x, std::uint32_t vmax) {
    double v = x * static_cast<double>(vmax);
    if (v < 0.0) v = 0.0;
    if (v > static_cast<double>(vmax)) v = static_cast<double>(vmax);
    return static_cast<std::uint32_t>(std::llround(v));
}

} // namespace

void write_msr(const std::string& path, const MultiBandImage& img, MsrDtype dtype) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const std::uint32_t vmax = img.source_vmax;
    if (dtype == MsrDtype::U8 && vmax > 255)
        throw IoError("write_msr: vmax " + std::to_string(vmax) + " does not fit dtype u8");
    if (dtype == MsrDtype::U16 && vmax > 65535)
        throw IoError("write_msr: vmax " + std::to_string(vmax) + " does not fit dtype u16");
    os.write("MSR1", 4);
    put_u32(os, static_cast<std::uint32_t>(img.width));
    put_u32(os, static_cast<std::uint32_t>(img.height));
    put_u32(os, static_cast<std::uint32_t>(img.bands));
    put_u32(os, static_cast<std::uint32_t>(dtype));
    put_u32(os, vmax);
    switch (dtype) {
    case MsrDtype::U8:
        for (double s : img.samples) {
            const unsigned char b = static_cast<unsigned char>(quantize(s, vmax));
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
        break;
    case MsrDtype::U16:
        for (double s : img.samples) {
            const std::uint32_t q = quantize(s, vmax);
            unsigned char b[2] = {static_cast<unsigned char>(q & 0xff),
                                  static_cast<unsigned char>((q >> 8) & 0xff)};
            os.write(reinterpret_cast<const char*>(b), 2);
        }
        break;
    case MsrDtype::F32:
        for (double s : img.samples) put_f32(os, static_cast<float>(s));
        break;
    }
    if (!os) throw IoError("write failed: " + path);
}

MultiBandImage read_msr(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MSR1", 4) != 0)
        throw IoError("not an MSR file: " + path);
    const std::uint32_t w = get_u32(is);
    const std::uint32_t h = get_u32(is);
    const std::uint32_t bands = get_u32(is);
    const std::uint32_t dtype = get_u32(is);
    const std::uint32_t vmax = get_u32(is);
    if (!is || w == 0 || h == 0 || bands == 0)
        throw IoError("malformed MSR header: " + path);
    if (dtype > 2) throw IoError("unknown MSR dtype " + std::to_string(dtype));
    MultiBandImage img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(bands),
                       vmax == 0 ? 1 : vmax);
    const double inv = 1.0 / static_cast<double>(img.source_vmax);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        switch (static_cast<MsrDtype>(dtype)) {
        case MsrDtype::U8: {
            unsigned char b;
            is.read(reinterpret_cast<char*>(&b), 1);
            img.samples[i] = b * inv;
            break;
        }
        case MsrDtype::U16: {
            unsigned char b[2];
            is.read(reinterpret_cast<char*>(b), 2);
            img.samples[i] = (static_cast<std::uint32_t>(b[0]) |
                              (static_cast<std::uint32_t>(b[1]) << 8)) * inv;
            break;
        }
        case MsrDtype::F32:
            img.samples[i] = get_f32(is);
            break;
        }
    }
    if (!is) throw IoError("truncated MSR payload: " + path);
    return img;
}

void write_pgm(const std::string& path, const MultiBandImage& img, int band) {
    if (band < 0 || band >= img.bands) throw ShapeError("write_pgm: band out of range");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    const double* p = img.band_ptr(band);
    for (std::size_t i = 0; i < img.plane(); ++i) {
        const unsigned char b = static_cast<unsigned char>(quantize(p[i], 255));
        os.write(reinterpret_cast<const char*>(&b), 1);
    }
    if (!os) throw IoError("write failed: " + path);
}

void write_ppm(const std::string& path, const MultiBandImage& img,
               int r_band, int g_band, int b_band) {
    for (int b : {r_band, g_band, b_band})
        if (b < 0 || b >= img.bands) throw ShapeError("write_ppm: band out of range");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    const double* planes[3] = {img.band_ptr(r_band), img.band_ptr(g_band),
                               img.band_ptr(b_band)};
    for (std::size_t i = 0; i < img.plane(); ++i) {
        for (const double* p : planes) {
            const unsigned char b = static_cast<unsigned char>(quantize(p[i], 255));
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

namespace {

int pnm_token(std::istream& is) {
    // skips whitespace and '#' comments
    int c = is.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#')
            while (c != '\n' && c != EOF) c = is.get();
        c = is.get();
    }
    int v = 0;
    while (std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = is.get();
    }
    return v;
}

} // namespace

MultiBandImage read_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw IoError("not a binary PGM/PPM file: " + path);
    const int bands = (m1 == '5') ? 1 : 3;
    const int w = pnm_token(is);
    const int h = pnm_token(is);
    const int maxval = pnm_token(is);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw IoError("unsupported PNM header: " + path);
    MultiBandImage img(w, h, bands, static_cast<std::uint32_t>(maxval));
    const double inv = 1.0 / maxval;
    // interleaved on disk, planar in memory
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int b = 0; b < bands; ++b) {
                const int c = is.get();
                if (c == EOF) throw IoError("truncated PNM payload: " + path);
                img.at(b, x, y) = c * inv;
            }
    return img;
}

} // namespace panlut
