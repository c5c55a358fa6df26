// MSR raster container (band-sequential, little-endian) plus PGM/PPM
// bridges for 8-bit viewing.
//
// MSR layout: magic "MSR1" | u32 width | u32 height | u32 bands |
// u32 dtype (0=u8, 1=u16, 2=f32) | u32 vmax | samples, bands outermost,
// rows next, columns innermost.

#ifndef PANLUT_RASTER_IO_HPP
#define PANLUT_RASTER_IO_HPP

#include <string>

#include "panlut/raster.hpp"

namespace panlut {

enum class MsrDtype : std::uint32_t { U8 = 0, U16 = 1, F32 = 2 };

void write_msr(const std::string& path, const MultiBandImage& img, MsrDtype dtype);
MultiBandImage read_msr(const std::string& path);

// 8-bit previews. PGM takes one band; PPM takes three.
void write_pgm(const std::string& path, const MultiBandImage& img, int band = 0);
void write_ppm(const std::string& path, const MultiBandImage& img,
               int r_band = 0, int g_band = 1, int b_band = 2);

// Reads a binary P5/P6 file into a normalized image (vmax from the header).
MultiBandImage read_pnm(const std::string& path);

} // namespace panlut

#endif
