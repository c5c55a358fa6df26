#include "panlut/lattice.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace panlut {

LutTable::LutTable(int D, int N, int E) : dims(D), points(N), out_channels(E) {
    if (D < 1 || D > kMaxLutDims)
        throw ShapeError("LutTable: dims must be in [1," + std::to_string(kMaxLutDims) + "]");
    if (N < 2) throw ShapeError("LutTable: need at least 2 points per axis");
    if (E < 1) throw ShapeError("LutTable: need at least 1 output channel");
    entries.assign(entry_count(D, N, E), 0.0);
}

std::size_t LutTable::entry_count(int D, int N, int E) {
    std::size_t n = static_cast<std::size_t>(E);
    for (int l = 0; l < D; ++l) n *= static_cast<std::size_t>(N);
    return n;
}

std::size_t LutTable::axis_stride(int axis) const {
    std::size_t s = static_cast<std::size_t>(out_channels);
    for (int l = axis + 1; l < dims; ++l) s *= static_cast<std::size_t>(points);
    return s;
}

double& LutTable::at(const int* idx, int channel) {
    std::size_t off = 0;
    for (int l = 0; l < dims; ++l)
        off = off * static_cast<std::size_t>(points) + static_cast<std::size_t>(idx[l]);
    return entries[off * out_channels + channel];
}

double LutTable::at(const int* idx, int channel) const {
    return const_cast<LutTable*>(this)->at(idx, channel);
}

LatticeQuery locate(const double* v, int dims, int points) {
    if (dims < 1 || dims > kMaxLutDims) throw ShapeError("locate: bad dims");
    LatticeQuery q;
    q.dims = dims;
    const int n = points;
    for (int l = 0; l < dims; ++l) {
        const double vl = v[l];
        if (!(vl >= 0.0 && vl <= 1.0))
            throw DomainError("locate: coordinate " + std::to_string(vl) + " on axis " +
                              std::to_string(l) + " outside [0,1]");
        const double x = vl * (n - 1);
        int base = static_cast<int>(std::floor(x));
        if (base > n - 2) base = n - 2;
        q.base[l] = base;
        q.frac[l] = x - base;
    }
    // expand weights axis by axis; axis 0 ends up as the most significant bit
    q.weights[0] = 1.0;
    int count = 1;
    for (int l = 0; l < dims; ++l) {
        const double f = q.frac[l];
        const double g = 1.0 - f;
        for (int c = count - 1; c >= 0; --c) {
            const double w = q.weights[c];
            q.weights[2 * c] = w * g;
            q.weights[2 * c + 1] = w * f;
        }
        count *= 2;
    }
    return q;
}

LatticeLayout::LatticeLayout(const LutTable& table)
    : dims(table.dims), out_channels(table.out_channels) {
    for (int l = 0; l < dims; ++l) strides[l] = table.axis_stride(l);
    const int corners = 1 << dims;
    for (int c = 0; c < corners; ++c) {
        std::size_t off = 0;
        for (int l = 0; l < dims; ++l)
            if ((c >> (dims - 1 - l)) & 1) off += strides[l];
        corner_offsets[c] = off;
    }
}

void interpolate(const LutTable& table, const LatticeLayout& layout,
                 const LatticeQuery& q, double* out) {
    if (q.dims != table.dims)
        throw ShapeError("interpolate: query dims " + std::to_string(q.dims) +
                         " != table dims " + std::to_string(table.dims));
    const int corners = q.corner_count();
    const int E = table.out_channels;
    const double* base = table.entries.data() + layout.base_offset(q);
    for (int e = 0; e < E; ++e) out[e] = 0.0;
    for (int c = 0; c < corners; ++c) {
        const double w = q.weights[c];
        const double* entry = base + layout.corner_offsets[c];
        for (int e = 0; e < E; ++e) out[e] += w * entry[e];
    }
}

std::vector<double> interpolate(const LutTable& table, const LatticeQuery& q) {
    std::vector<double> out(table.out_channels);
    interpolate(table, LatticeLayout(table), q, out.data());
    return out;
}

void backprop_entries(const LutTable& table, const LatticeLayout& layout,
                      const LatticeQuery& q, const double* dL_dout,
                      std::vector<double>& grad_accum) {
    if (grad_accum.size() != table.entries.size())
        throw ShapeError("backprop_entries: accumulator shape mismatch");
    if (q.dims != table.dims) throw ShapeError("backprop_entries: dims mismatch");
    const int corners = q.corner_count();
    const int E = table.out_channels;
    double* base = grad_accum.data() + layout.base_offset(q);
    for (int c = 0; c < corners; ++c) {
        const double w = q.weights[c];
        double* slot = base + layout.corner_offsets[c];
        for (int e = 0; e < E; ++e) slot[e] += w * dL_dout[e];
    }
}

void backprop_inputs(const LutTable& table, const LatticeLayout& layout,
                     const LatticeQuery& q, const double* dL_dout, double* dL_dv) {
    const int D = q.dims;
    const int corners = q.corner_count();
    const int E = table.out_channels;
    const int N = table.points;
    const double* base = table.entries.data() + layout.base_offset(q);
    for (int l = 0; l < D; ++l) dL_dv[l] = 0.0;
    double factors[kMaxLutDims], prefix[kMaxLutDims + 1], suffix[kMaxLutDims + 1];
    for (int c = 0; c < corners; ++c) {
        const double* entry = base + layout.corner_offsets[c];
        double s = 0.0;
        for (int e = 0; e < E; ++e) s += entry[e] * dL_dout[e];
        if (s == 0.0) continue;
        for (int l = 0; l < D; ++l) {
            const bool hi = (c >> (D - 1 - l)) & 1;
            factors[l] = hi ? q.frac[l] : 1.0 - q.frac[l];
        }
        prefix[0] = 1.0;
        for (int l = 0; l < D; ++l) prefix[l + 1] = prefix[l] * factors[l];
        suffix[D] = 1.0;
        for (int l = D - 1; l >= 0; --l) suffix[l] = suffix[l + 1] * factors[l];
        for (int l = 0; l < D; ++l) {
            const bool hi = (c >> (D - 1 - l)) & 1;
            const double dwdf = (hi ? 1.0 : -1.0) * prefix[l] * suffix[l + 1];
            dL_dv[l] += dwdf * s;
        }
    }
    for (int l = 0; l < D; ++l) dL_dv[l] *= static_cast<double>(N - 1);
}

std::vector<double> backprop_inputs(const LutTable& table, const LatticeQuery& q,
                                    const std::vector<double>& dL_dout) {
    std::vector<double> out(q.dims);
    backprop_inputs(table, LatticeLayout(table), q, dL_dout.data(), out.data());
    return out;
}

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

} // namespace

void write_plut(std::ostream& os, const LutTable& table, LutKind kind) {
    os.write("PLUT", 4);
    put_u16(os, 1); // version
    const unsigned char kind_b = static_cast<unsigned char>(kind);
    const unsigned char dims_b = static_cast<unsigned char>(table.dims);
    os.write(reinterpret_cast<const char*>(&kind_b), 1);
    os.write(reinterpret_cast<const char*>(&dims_b), 1);
    put_u16(os, static_cast<std::uint16_t>(table.points));
    put_u16(os, static_cast<std::uint16_t>(table.out_channels));
    put_u16(os, 0); // reserved
    for (double e : table.entries) {
        const float f = static_cast<float>(e);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                              static_cast<unsigned char>((bits >> 8) & 0xff),
                              static_cast<unsigned char>((bits >> 16) & 0xff),
                              static_cast<unsigned char>((bits >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!os) throw IoError("write_plut: stream failure");
}

std::pair<LutTable, LutKind> read_plut(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PLUT", 4) != 0)
        throw IoError("read_plut: bad magic");
    const std::uint16_t version = get_u16(is);
    if (version != 1) throw IoError("read_plut: unsupported version " + std::to_string(version));
    unsigned char kind_b = 0, dims_b = 0;
    is.read(reinterpret_cast<char*>(&kind_b), 1);
    is.read(reinterpret_cast<char*>(&dims_b), 1);
    const std::uint16_t points = get_u16(is);
    const std::uint16_t channels = get_u16(is);
    get_u16(is); // reserved
    if (!is || kind_b > 2) throw IoError("read_plut: malformed header");
    LutTable table(dims_b, points, channels);
    for (double& e : table.entries) {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                             (static_cast<std::uint32_t>(b[1]) << 8) |
                             (static_cast<std::uint32_t>(b[2]) << 16) |
                             (static_cast<std::uint32_t>(b[3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        e = static_cast<double>(f);
    }
    if (!is) throw IoError("read_plut: truncated entries");
    return {std::move(table), static_cast<LutKind>(kind_b)};
}

void write_plut_file(const std::string& path, const LutTable& table, LutKind kind) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_plut(os, table, kind);
}

std::pair<LutTable, LutKind> read_plut_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    return read_plut(is);
}

void quantize_to_storage(LutTable& table) {
    for (double& e : table.entries) e = static_cast<double>(static_cast<float>(e));
}

} // namespace panlut
