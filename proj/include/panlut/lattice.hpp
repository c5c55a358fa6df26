// Generic D-dimensional lattice storage and multilinear interpolation with
// analytic gradients w.r.t. both table entries and query inputs. The 4-D and
// 5-D instances realize the quadrilinear (16-corner) and pentalinear
// (32-corner) forms used by the model stages.

#ifndef PANLUT_LATTICE_HPP
#define PANLUT_LATTICE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "panlut/error.hpp"

namespace panlut {

inline constexpr int kMaxLutDims = 5;

// E output values per lattice point, N points per axis, D axes.
// Entry layout: axes outermost in declared order, channel innermost, i.e.
// flat(i_0..i_{D-1}, e) = ((i_0*N + i_1)*N + ...)*E + e.
struct LutTable {
    int dims = 0;
    int points = 0;
    int out_channels = 0;
    std::vector<double> entries;

    LutTable() = default;
    LutTable(int D, int N, int E);

    static std::size_t entry_count(int D, int N, int E);

    // stride of one step along `axis`, in flat entry units
    std::size_t axis_stride(int axis) const;

    double& at(const int* idx, int channel);
    double at(const int* idx, int channel) const;
};

// Resolved lookup state for one input point. Corner weights are ordered by a
// binary counter over axes with axis 0 as the most significant bit.
struct LatticeQuery {
    int dims = 0;
    std::array<int, kMaxLutDims> base{};
    std::array<double, kMaxLutDims> frac{};
    std::array<double, (1 << kMaxLutDims)> weights{};

    int corner_count() const { return 1 << dims; }
};

// Maps v in [0,1]^D onto the lattice: x = v*(N-1), base = min(floor(x), N-2),
// frac = x - base. Throws DomainError for out-of-range coordinates.
LatticeQuery locate(const double* v, int dims, int points);

// Precomputed strides and corner offsets for one (D,N,E) shape; shared by
// every query against tables of that shape.
struct LatticeLayout {
    int dims = 0;
    int out_channels = 0;
    std::array<std::size_t, kMaxLutDims> strides{};
    std::array<std::size_t, (1 << kMaxLutDims)> corner_offsets{};

    LatticeLayout() = default;
    explicit LatticeLayout(const LutTable& table);

    std::size_t base_offset(const LatticeQuery& q) const {
        std::size_t off = 0;
        for (int l = 0; l < dims; ++l) off += static_cast<std::size_t>(q.base[l]) * strides[l];
        return off;
    }
};

// out[e] = sum over 2^D corners of weight_c * entry(corner_c, e).
void interpolate(const LutTable& table, const LatticeLayout& layout,
                 const LatticeQuery& q, double* out);
std::vector<double> interpolate(const LutTable& table, const LatticeQuery& q);

// grad_accum(corner_c, e) += weight_c * dL_dout[e] for all corners.
void backprop_entries(const LutTable& table, const LatticeLayout& layout,
                      const LatticeQuery& q, const double* dL_dout,
                      std::vector<double>& grad_accum);

// Returns dL/dv per input coordinate; chain rule through the (N-1) index
// scaling. One-sided at cell boundaries (derivative of the located cell).
void backprop_inputs(const LutTable& table, const LatticeLayout& layout,
                     const LatticeQuery& q, const double* dL_dout, double* dL_dv);
std::vector<double> backprop_inputs(const LutTable& table, const LatticeQuery& q,
                                    const std::vector<double>& dL_dout);

// Stage tag carried by the PLUT block format.
enum class LutKind : std::uint8_t { Pglut = 0, Sdlut = 1, Aolut = 2 };

// PLUT block: "PLUT" | u16 version=1 | u8 kind | u8 dims | u16 points |
// u16 out_channels | u16 reserved=0 | E*N^D f32-LE entries.
void write_plut(std::ostream& os, const LutTable& table, LutKind kind);
std::pair<LutTable, LutKind> read_plut(std::istream& is);
void write_plut_file(const std::string& path, const LutTable& table, LutKind kind);
std::pair<LutTable, LutKind> read_plut_file(const std::string& path);

// Rounds entries to their f32 storage representation in place.
void quantize_to_storage(LutTable& table);

} // namespace panlut

#endif
